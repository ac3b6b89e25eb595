#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "superburst/config.hpp"
#include "superburst/geometry.hpp"
#include "superburst/record.hpp"

namespace superburst {

/// Level scheme described by the [atoms] section.
LevelScheme scheme_for(const AtomsConfig& atoms);

/// Channel index for a key; empty selects the dominant channel.
std::size_t resolve_channel(const LevelScheme& scheme, const std::string& key);

/// Lattice constant in nm from [array] (spacing_lambda uses the dominant wavelength).
double resolved_spacing(const ArrayConfig& array, const LevelScheme& scheme);

/// Uniform grid of `samples` points on [0, t_max].
VectorX time_grid(const IntegrationConfig& integration);

Detector detector_for(const DetectorConfig& detector);

/// Peaks, photon numbers and shares of every series in a record.
nlohmann::json record_summary(const EmissionRecord& record);

struct RunOutcome {
  nlohmann::json summary;
  std::vector<std::string> files;  // relative to the run directory
  bool partial = false;
  std::string message;
};

/// Runs one (non-preset) experiment, writing its files into `directory`.
/// Solver failures that leave a partial record are reported through
/// RunOutcome::partial; other failures throw.
RunOutcome run_experiment(const ExperimentConfig& config, const std::filesystem::path& directory,
                          unsigned threads = 1);

/// manifest.json with config hash, code version, wall time and partial flag.
void write_manifest(const std::filesystem::path& directory, const ExperimentConfig& config,
                    const RunOutcome& outcome, double wall_seconds);

const char* code_version();

}  // namespace superburst
