#pragma once

#include <cmath>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "superburst/atoms.hpp"
#include "superburst/geometry.hpp"
#include "superburst/linalg.hpp"

namespace superburst {

/// Coherent and dissipative parts of J - i Gamma / 2 for one atom pair.
template <typename Scalar>
struct PairKernel {
  Scalar coherent;     // J / Gamma0^a
  Scalar dissipative;  // Gamma / Gamma0^a
};

/// Free-space dipole propagator in units of the single-atom rate, as a function of
/// u = k|r| and P = |d* . r_hat|^2. Gamma -> 1 as u -> 0.
template <typename Scalar>
PairKernel<Scalar> dipole_kernel(Scalar u, Scalar p) {
  using std::cos;
  using std::sin;
  const Scalar s = sin(u), c = cos(u);
  const Scalar u2 = u * u;
  // cos u / u^2 - sin u / u^3, which cancels catastrophically at small u.
  Scalar h;
  if (u < Scalar(0.1)) {
    h = Scalar(-1) / Scalar(3) +
        u2 * (Scalar(1) / Scalar(30) +
              u2 * (Scalar(-1) / Scalar(840) + u2 * (Scalar(1) / Scalar(45360) +
                                                     u2 * Scalar(-1) / Scalar(3991680))));
  } else {
    h = c / u2 - s / (u2 * u);
  }
  const Scalar transverse = Scalar(1) - p;
  const Scalar longitudinal = Scalar(1) - Scalar(3) * p;
  PairKernel<Scalar> k;
  k.dissipative = Scalar(1.5) * (transverse * s / u + longitudinal * h);
  k.coherent = Scalar(-0.75) * (transverse * c / u - longitudinal * (s / u2 + c / (u2 * u)));
  return k;
}

/// J_jl and Gamma_jl (s^-1) for displacement r_vec (nm) on a channel.
PairKernel<double> greens_coupling(const Vector3& r_vec, const DecayChannel& channel);

/// Per-channel coupling matrices in units of the scheme total rate Gamma0.
struct ChannelCoupling {
  std::string key;
  std::string label;
  double rate = 0.0;        // Gamma0^a / Gamma0
  double wavenumber = 0.0;  // nm^-1
  Vector3c polarization = Vector3c::UnitZ();
  bool correlated = true;
  MatrixX gamma;     // real symmetric, diag = rate
  MatrixX coherent;  // real symmetric, zero diagonal
  VectorX spectrum;  // eigenvalues of gamma, descending
  MatrixX modes;     // column nu = eigenvector of spectrum(nu)

  bool has_spectrum() const { return spectrum.size() == gamma.rows() && gamma.rows() > 0; }
};

struct CouplingSet {
  double total_rate_si = 0.0;  // Gamma0 in s^-1
  std::vector<ChannelCoupling> channels;

  /// Atom count, taken from the first built channel (see CouplingOptions::only_channel).
  int size() const {
    for (const auto& ch : channels)
      if (ch.gamma.rows() > 0) return static_cast<int>(ch.gamma.rows());
    return 0;
  }
};

struct CouplingOptions {
  bool with_spectrum = true;
  /// Restrict matrix construction to one channel; the others keep only their rates.
  std::optional<std::size_t> only_channel;
};

CouplingSet coupling_matrices(const ArrayGeometry& geometry, const LevelScheme& scheme,
                              const CouplingOptions& options = {});

/// Sum of squared eigenvalues computed as the squared Frobenius norm.
double spectrum_square_sum(const ChannelCoupling& channel);

/// W_jl = exp(i k R . (r_j - r_l)), the weights of <sigma_+^j sigma_-^l> in the
/// far-field intensity along R.
MatrixXc directional_weights(const ArrayGeometry& geometry, double wavenumber,
                             const Vector3& direction);

/// Debug dump: one block per channel, header line then N rows of Gamma, J and spectrum.
void write_coupling_csv(std::ostream& os, const CouplingSet& couplings);

}  // namespace superburst
