#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Sparse>

#include "superburst/cumulant.hpp"
#include "superburst/geometry.hpp"
#include "superburst/interactions.hpp"
#include "superburst/ode.hpp"
#include "superburst/record.hpp"

namespace superburst {

/// Two-level product basis split into excitation-number blocks. A state is a
/// bitmask with bit j set when atom j is excited.
struct ExcitationBasis {
  int atoms = 0;
  std::vector<std::vector<std::uint32_t>> blocks;  // blocks[n]: masks with n excitations, ascending
  std::vector<std::int32_t> position;              // position[mask] inside its block

  explicit ExcitationBasis(int atoms);
  Eigen::Index dim(int n) const { return static_cast<Eigen::Index>(blocks[static_cast<std::size_t>(n)].size()); }
};

using SparseC = Eigen::SparseMatrix<complex, Eigen::RowMajor>;

/// H_eff = sum_jl (J_jl - i Gamma_jl / 2) sigma_+^j sigma_-^l restricted to block n.
SparseC effective_hamiltonian_block(const ExcitationBasis& basis, const ChannelCoupling& channel, int n);

/// <sigma_+^j sigma_-^l> of a pure state in block n (diagonal: populations).
MatrixXc pair_expectations(const ExcitationBasis& basis, int n, const VectorXc& psi);

struct ExactOptions {
  OdeTolerances tolerances{1e-9, 1e-12};
  std::vector<DirectionalProbe> probes;
};

/// Block-diagonal Lindblad evolution from the fully excited state. The couplings
/// must describe a single (two-level) channel; N <= 10.
EmissionRecord master_equation_evolve(const CouplingSet& couplings, const ArrayGeometry& geometry,
                                      const VectorX& t_grid, const ExactOptions& options = {});

enum class JumpBasis {
  Modes,     // decay-spectrum eigenmodes of Gamma
  Cholesky,  // pivoted LDL^T factor of Gamma (an independent unravelling)
};

struct McwfOptions {
  OdeTolerances tolerances{1e-8, 1e-10};
  std::vector<DirectionalProbe> probes;
  std::size_t trajectories = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  JumpBasis basis = JumpBasis::Modes;
};

struct McwfResult {
  EmissionRecord record;                 // ensemble mean with standard errors
  std::vector<int> jumps;                // jumps per trajectory
  std::size_t clamped_modes = 0;         // negative Gamma_nu set to zero
  std::size_t restarts = 0;              // trajectories redrawn after norm underflow
};

/// Monte Carlo wavefunction ensemble with norm-threshold jump detection; N <= 16.
/// Output is independent of the thread count.
McwfResult mcwf_ensemble(const CouplingSet& couplings, const ArrayGeometry& geometry,
                         const VectorX& t_grid, const McwfOptions& options);

/// Seed of trajectory `index` derived from the master seed (splitmix64).
std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index);

}  // namespace superburst
