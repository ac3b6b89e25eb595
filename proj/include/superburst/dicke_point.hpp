#pragma once

#include <string>
#include <vector>

#include "superburst/ode.hpp"
#include "superburst/record.hpp"

namespace superburst {

enum class PointModel { TwoLevel, Lambda, Ladder };

std::string to_string(PointModel m);
PointModel parse_point_model(const std::string& text);

/// Atoms at a single point. Rates are in any common unit; the record's time axis
/// is in the inverse of that unit.
///   TwoLevel: {Gamma_eg}          levels e, g
///   Lambda:   {Gamma_eg, Gamma_eh} levels e, g, h
///   Ladder:   {Gamma_ef, Gamma_fg} levels e, f, g
struct PointModelSpec {
  PointModel model = PointModel::TwoLevel;
  int atoms = 1;
  std::vector<double> rates{1.0};
};

struct PointChannel {
  std::string key;  // record column key
  int upper;        // level index
  int lower;
  double rate;
};

int level_count(PointModel m);
std::vector<PointChannel> point_channels(const PointModelSpec& spec);

/// Occupation numbers per level, summing to N.
using Occupation = std::vector<int>;

struct ConfigDistribution {
  std::vector<Occupation> configs;
  VectorX probs;
};

/// Gamma * n_upper * (n_lower + 1): squared norm of the collective lowering
/// operator applied to the symmetric occupation state.
double config_jump_rate(const PointModelSpec& spec, const Occupation& config, std::size_t channel);

/// All occupations of the model, the fully excited one first. Throws
/// ResourceError above 1e7 configurations.
ConfigDistribution fully_excited_distribution(const PointModelSpec& spec);

struct PointRunOptions {
  OdeTolerances tolerances{1e-8, 1e-12};
  /// Stop once every channel has passed its maximum and decayed below this
  /// fraction of it (0 disables). Used by scaling studies that only need peaks.
  double stop_after_peak_fraction = 0.0;
};

/// Classical master equation on the occupation simplex from the fully excited
/// state; per-channel rates sampled on t_grid (t_grid(0) must be 0).
EmissionRecord evolve_point(const PointModelSpec& spec, const VectorX& t_grid,
                            const PointRunOptions& options = {},
                            ConfigDistribution* final_state = nullptr);

/// Full Lindblad evolution in the m^N product space with explicit collective
/// operators, for validating the occupation-simplex reduction. N <= 6.
EmissionRecord symmetric_subspace_oracle(const PointModelSpec& spec, const VectorX& t_grid,
                                         const OdeTolerances& tolerances = {1e-10, 1e-13});

}  // namespace superburst
