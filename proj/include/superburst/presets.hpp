#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "superburst/config.hpp"
#include "superburst/experiment.hpp"

namespace superburst {

/// One run of a preset bundle; `id` names its output subdirectory.
struct PresetRun {
  std::string id;
  ExperimentConfig config;
};

std::vector<std::string> preset_names();

/// Fully specified configs for a figure preset. Throws std::invalid_argument
/// for an unknown name. `seed` feeds every trajectory ensemble.
std::vector<PresetRun> preset_bundle(const std::string& name, std::uint64_t seed = 1);

struct PresetCheck {
  std::string label;
  bool pass = false;
  std::string detail;
};

struct PresetResult {
  std::vector<PresetRun> runs;
  std::vector<RunOutcome> outcomes;
  bool partial = false;
};

/// Runs every config of the bundle into root/<name>/<id>, each with its own
/// manifest, plus a bundle manifest in root/<name>.
PresetResult run_preset(const std::string& name, const std::filesystem::path& root, unsigned threads = 1,
                        std::uint64_t seed = 1);

/// Quantitative checks of a finished preset against the published numbers.
/// Presets without checks return an empty list.
std::vector<PresetCheck> check_preset(const std::string& name, const PresetResult& result);

}  // namespace superburst
