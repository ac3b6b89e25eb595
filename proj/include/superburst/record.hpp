#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "superburst/linalg.hpp"

namespace superburst {

/// Sampled emission rates. Times are in units of 1/Gamma0 and rates in units of
/// Gamma0 of the run (the scheme total rate, or the reference rate of a point model).
struct EmissionRecord {
  VectorX t;
  std::vector<std::string> channels;      // channel keys, column order of `rates`
  MatrixX rates;                           // samples x channels
  std::vector<std::string> directional;   // keys of directional series (per steradian)
  MatrixX directional_rates;               // samples x directional.size()
  MatrixX rates_stderr;                    // empty unless the record is an ensemble mean
  VectorX total_stderr;                    // standard error of the summed rate
  MatrixX directional_stderr;
  VectorX excited;                         // sum_j <sigma_ee^j>, empty when not tracked

  bool partial = false;                    // integration stopped before the last sample
  std::string failure;                     // reason when partial
  double positivity_violation = 0.0;       // largest excursion outside [0, 1] of populations

  /// Allocates `samples` rows for the given channel and directional keys.
  void allocate(const VectorX& times, std::vector<std::string> channel_keys,
                std::vector<std::string> directional_keys = {}, bool with_stderr = false,
                bool with_excited = false);
  /// Drops rows from `samples` on (used for partial records).
  void truncate(Eigen::Index samples);

  Eigen::Index samples() const { return t.size(); }
  Eigen::Index channel_index(const std::string& key) const;
  VectorX total() const { return rates.rowwise().sum(); }
  /// Trapezoidal photon number emitted on each channel over the record.
  VectorX photons() const;
};

/// CSV with header t_gamma0, R_total, R_<key>..., R_dir_<key>..., then
/// <column>_stderr columns for ensemble records, then excited if tracked.
void write_record_csv(std::ostream& os, const EmissionRecord& record);

/// Trapezoid rule on a sampled series.
double trapezoid(const VectorX& t, const VectorX& y);

}  // namespace superburst
