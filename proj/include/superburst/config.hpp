#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "superburst/atoms.hpp"
#include "superburst/dicke_point.hpp"

namespace superburst {

enum class ExperimentKind { CriteriaSweep, PointModel, Cumulant, ExactBenchmark, Scaling, Preset };

std::string to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(const std::string& text);

struct AtomsConfig {
  Species species = Species::Yb174;
  InitialState initial_state = InitialState::D1_m0;
  bool include_weak_line = false;
  /// Generic two-level atoms (one channel) instead of a species scheme.
  bool two_level = false;
  std::string dipole = "z";  // two-level dipole: x, y, z, sigma+, sigma-
  double wavelength_nm = 1000.0;  // two-level wavelength
  friend bool operator==(const AtomsConfig&, const AtomsConfig&) = default;
};

struct PointConfig {
  PointModel model = PointModel::Lambda;
  int atoms = 40;
  std::vector<double> rates{2.0, 1.0};
  friend bool operator==(const PointConfig&, const PointConfig&) = default;
};

struct ArrayConfig {
  int n_x = 3;
  int n_y = 3;
  /// Exactly one of the two spacings is positive; spacing_lambda is in units of
  /// the dominant channel's wavelength.
  double spacing_nm = 0.0;
  double spacing_lambda = 0.2;
  friend bool operator==(const ArrayConfig&, const ArrayConfig&) = default;
};

struct DetectorConfig {
  bool enabled = true;  // false: all emitted light (variance criterion, no probe)
  double theta_deg = 90.0;
  double phi_deg = 0.0;
  std::string channel;  // channel key; empty selects the dominant channel
  friend bool operator==(const DetectorConfig&, const DetectorConfig&) = default;
};

struct IntegrationConfig {
  double t_max = 10.0;  // units of 1/Gamma0
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  int samples = 401;
  /// Stop a run once all rates fell below this fraction of their peaks (0: never).
  double stop_after_peak = 0.0;
  friend bool operator==(const IntegrationConfig&, const IntegrationConfig&) = default;
};

struct SweepConfig {
  double min_nm = 100.0;
  double max_nm = 3000.0;
  double step_nm = 10.0;
  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

struct TrajectoriesConfig {
  std::size_t count = 0;  // 0: no Monte Carlo ensemble
  std::uint64_t seed = 1;
  std::string basis = "modes";  // modes or cholesky
  bool master_equation = true;  // exact benchmark also runs the master equation (N <= 10)
  friend bool operator==(const TrajectoriesConfig&, const TrajectoriesConfig&) = default;
};

struct ScalingConfig {
  std::string target = "point";  // point: sizes are N; array: sizes are side lengths
  std::vector<int> sizes{20, 30, 40, 50, 60, 70, 80, 90, 100};
  double n_min = 20.0;
  friend bool operator==(const ScalingConfig&, const ScalingConfig&) = default;
};

struct OutputConfig {
  std::string directory = "out";
  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Cumulant;
  std::string name = "run";
  std::string preset;  // kind = preset only
  AtomsConfig atoms;
  PointConfig point;
  ArrayConfig array;
  DetectorConfig detector;
  IntegrationConfig integration;
  SweepConfig sweep;
  TrajectoriesConfig trajectories;
  ScalingConfig scaling;
  OutputConfig output;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Malformed configuration text; `line` is 1-based (0 when not tied to a line).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, std::string field, const std::string& message);
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

/// Flat INI: [section] headers, key = value lines, '#' comments.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

/// Range and consistency checks; throws ConfigError.
void validate_config(const ExperimentConfig& config);

/// 64-bit FNV-1a of the serialized config, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace superburst
