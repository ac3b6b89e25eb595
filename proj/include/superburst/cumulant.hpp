#pragma once

#include <string>
#include <vector>

#include "superburst/geometry.hpp"
#include "superburst/interactions.hpp"
#include "superburst/ode.hpp"
#include "superburst/record.hpp"

namespace superburst {

/// Second-order moments of a multichannel array with one excited level e and
/// one ground level per channel. Indices j != l only for pair quantities; the
/// diagonals are kept at zero.
///   a_j      = <n_e^j>
///   b[c]_j   = <n_c^j>             (ground state of channel c)
///   e_jl     = <n_e^j n_e^l>
///   f[c]_jl  = <n_e^j n_c^l>
///   q[c]_jl  = <sigma_ec^j sigma_ce^l>  (Hermitian; zero for uncorrelated channels)
struct CumulantState {
  VectorX a;
  std::vector<VectorX> b;
  MatrixX e;
  std::vector<MatrixX> f;
  std::vector<MatrixXc> q;

  int size() const { return static_cast<int>(a.size()); }
  std::size_t channels() const { return b.size(); }
};

/// Fully excited product state: a = 1, e = 1 off the diagonal, all else 0.
CumulantState init_fully_excited(int atoms, std::size_t channels);

/// Per-channel constants C = J - i Gamma / 2 (diagonal -i Gamma0^a / 2).
struct ChannelConstants {
  MatrixXc c;
  MatrixXc c_offdiag;  // C with zero diagonal
  MatrixX gamma;
  double rate = 0.0;
  bool correlated = true;
};

std::vector<ChannelConstants> channel_constants(const CouplingSet& couplings);

/// Closed equations of motion on full matrices. The last channel's ground
/// quantities are ignored on input and not meaningful on output: they follow
/// from completeness (see complete_last_channel).
CumulantState cumulant_rhs(const CumulantState& state, const std::vector<ChannelConstants>& constants);

/// Fills b and f of the last channel from sum rules: b = 1 - a - sum(other b),
/// f_jl = a_j - e_jl - sum(other f_jl).
void complete_last_channel(CumulantState& state);

/// Gamma0^a sum_j a_j + sum_{j != l} Gamma^a_jl q^a_jl.
double channel_rate(const CumulantState& state, const ChannelConstants& constants, std::size_t channel);

/// Far-field rate per steradian along the detector on channel `channel`.
double directional_rate(const CumulantState& state, const CouplingSet& couplings,
                        const ArrayGeometry& geometry, std::size_t channel, const Detector& detector);

/// Dipole-pattern prefactor 3 Gamma0^a / (8 pi) (1 - |d* . R|^2).
double directional_prefactor(const ChannelCoupling& channel, const Detector& detector);

struct DirectionalProbe {
  std::size_t channel = 0;
  Detector detector;
  std::string label;  // record key; the channel key when empty
};

struct CumulantOptions {
  OdeTolerances tolerances{1e-8, 1e-10};
  std::vector<DirectionalProbe> probes;
  /// Stop once every channel rate (and probe) has peaked and fallen below this
  /// fraction of its maximum; 0 integrates the whole grid.
  double stop_after_peak_fraction = 0.0;
  /// Populations outside [-tol, 1 + tol] are counted as violations.
  double positivity_tol = 1e-6;
};

/// Integrates from the fully excited state and samples per-channel, total and
/// probe rates plus the excited population. Integration failures return the
/// partial record with `partial` set.
EmissionRecord evolve_cumulant(const CouplingSet& couplings, const ArrayGeometry& geometry,
                               const VectorX& t_grid, const CumulantOptions& options = {});

/// Packed real state vector of the integrator and its inverse.
class CumulantLayout {
 public:
  CumulantLayout(int atoms, const std::vector<ChannelConstants>& constants);
  Eigen::Index size() const { return size_; }
  void pack(const CumulantState& state, VectorX& y) const;
  void unpack(const VectorX& y, CumulantState& state) const;

 private:
  int n_;
  std::size_t k_;
  std::vector<bool> correlated_;
  Eigen::Index size_ = 0;
};

/// Dedicated two-level equations (b = 1 - a, f = a - e eliminated by hand),
/// an independent route for the single-channel case.
EmissionRecord evolve_cumulant_two_level(const ChannelCoupling& channel, const ArrayGeometry& geometry,
                                         const VectorX& t_grid, const CumulantOptions& options = {});

}  // namespace superburst
