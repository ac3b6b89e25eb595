#pragma once

#include <string>
#include <utility>
#include <vector>

#include "superburst/record.hpp"

namespace superburst {

struct Peak {
  double t = 0.0;
  double value = 0.0;
  bool burst = false;
  Eigen::Index index = 0;  // sample holding the discrete maximum
};

/// Quadratic interpolation through the three samples around the discrete maximum.
/// A maximum at the first sample means no burst: t = 0, value = y(0).
Peak find_peak(const VectorX& t, const VectorX& y);
Peak find_peak(const EmissionRecord& record, const std::string& channel);

struct FitResult {
  double exponent = 0.0;   // power law: slope in log-log
  double prefactor = 0.0;  // power law: exp(intercept)
  double A = 0.0;          // share fit 1 - A / N^B
  double B = 0.0;
  double residual = 0.0;   // RMS residual in log space
  std::vector<double> n_values;
};

/// Least squares of ln(peak) against ln(N) over points with N >= n_min.
FitResult fit_power_law(const std::vector<std::pair<double, double>>& points, double n_min);

/// Least squares of ln(1 - share) against ln(N); A = exp(intercept), B = -slope.
FitResult fit_share(const std::vector<std::pair<double, double>>& points, double n_min);

/// Fraction of photons emitted on each channel (trapezoid rule).
VectorX photon_shares(const EmissionRecord& record);

}  // namespace superburst
