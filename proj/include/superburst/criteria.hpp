#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "superburst/atoms.hpp"
#include "superburst/geometry.hpp"
#include "superburst/interactions.hpp"

namespace superburst {

struct CriterionResult {
  double value = 0.0;
  double threshold = 1.0;
  bool burst_predicted = false;
  std::string channel;
  std::optional<Detector> detector;  // empty for the all-light variance criterion

  /// value / threshold, compared against 1 (the form plotted for transition closing).
  double normalized() const { return value / threshold; }
};

/// Var(Gamma_nu / Gamma0^a) from the Frobenius norm; threshold Gamma0 / Gamma0^a.
CriterionResult variance_criterion(const CouplingSet& couplings, std::size_t channel);

/// Directional quantity S for detection along `detector`; threshold 1.
CriterionResult directional_criterion(const CouplingSet& couplings, const ArrayGeometry& geometry,
                                      std::size_t channel, const Detector& detector);

/// Conditional g2(0) of the fully excited state implied by a closed-form criterion.
double g2_from_criterion(const CouplingSet& couplings, std::size_t channel,
                         const CriterionResult& result);

/// Exact four-operator evaluation of the conditional g2(0) on the fully excited
/// state, using the decay-spectrum modes of every channel as the emitting
/// operators. Detected operators are the channel's modes, or the far-field
/// lowering operator along `detector` when given. N <= 12.
double brute_force_g2(const CouplingSet& couplings, const ArrayGeometry& geometry,
                      std::size_t channel, const std::optional<Detector>& detector = std::nullopt);

struct SweepPoint {
  double d_nm = 0.0;
  CriterionResult result;
};

struct SweepCurve {
  std::vector<SweepPoint> points;

  /// Lattice constants where the burst flag flips, each the midpoint of the
  /// bracketing grid interval.
  std::vector<double> crossings() const;
  /// Burst regions [begin, end]; open ends use the first/last grid point.
  std::vector<std::pair<double, double>> burst_intervals() const;
};

struct SweepRequest {
  int n_x = 12;
  int n_y = 12;
  double d_min_nm = 100.0;
  double d_max_nm = 3000.0;
  double step_nm = 10.0;
  std::size_t channel = 0;
  std::optional<Detector> detector;  // empty: variance criterion
  unsigned threads = 1;
};

SweepCurve criterion_sweep(const LevelScheme& scheme, const SweepRequest& request);

/// Columns d_nm, channel, value, threshold, burst, theta, phi (angles in radians,
/// empty for the variance criterion).
void write_sweep_csv(std::ostream& os, const SweepCurve& curve);

}  // namespace superburst
