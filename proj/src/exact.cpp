#include "superburst/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iostream>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "superburst/parallel.hpp"

namespace superburst {

ExcitationBasis::ExcitationBasis(int n) : atoms(n) {
  if (n < 1 || n > 16) throw ResourceError("ExcitationBasis: N must be in [1, 16]");
  const std::uint32_t count = 1u << n;
  blocks.assign(static_cast<std::size_t>(n) + 1, {});
  position.assign(count, 0);
  for (std::uint32_t mask = 0; mask < count; ++mask) {
    auto& block = blocks[static_cast<std::size_t>(std::popcount(mask))];
    position[mask] = static_cast<std::int32_t>(block.size());
    block.push_back(mask);
  }
}

SparseC effective_hamiltonian_block(const ExcitationBasis& basis, const ChannelCoupling& channel, int n) {
  const int atoms = basis.atoms;
  const MatrixXc c = channel.coherent.cast<complex>() - 0.5 * kI * channel.gamma.cast<complex>();
  const auto& block = basis.blocks[static_cast<std::size_t>(n)];
  std::vector<Eigen::Triplet<complex>> trips;
  trips.reserve(block.size() * static_cast<std::size_t>(n * (atoms - n) + 1));
  for (std::size_t col = 0; col < block.size(); ++col) {
    const std::uint32_t y = block[col];
    complex diag = 0.0;
    for (int l = 0; l < atoms; ++l) {
      if (!(y >> l & 1u)) continue;
      diag += c(l, l);
      for (int j = 0; j < atoms; ++j) {
        if (y >> j & 1u) continue;
        const std::uint32_t x = (y & ~(1u << l)) | (1u << j);
        trips.emplace_back(basis.position[x], static_cast<int>(col), c(j, l));
      }
    }
    trips.emplace_back(static_cast<int>(col), static_cast<int>(col), diag);
  }
  SparseC h(static_cast<Eigen::Index>(block.size()), static_cast<Eigen::Index>(block.size()));
  h.setFromTriplets(trips.begin(), trips.end());
  return h;
}

MatrixXc pair_expectations(const ExcitationBasis& basis, int n, const VectorXc& psi) {
  const int atoms = basis.atoms;
  MatrixXc p = MatrixXc::Zero(atoms, atoms);
  if (n == 0) return p;
  std::vector<complex> amp(static_cast<std::size_t>(atoms));
  std::vector<int> sites;
  for (std::uint32_t x : basis.blocks[static_cast<std::size_t>(n - 1)]) {
    sites.clear();
    for (int l = 0; l < atoms; ++l) {
      if (x >> l & 1u) continue;
      sites.push_back(l);
      amp[static_cast<std::size_t>(l)] = psi(basis.position[x | (1u << l)]);
    }
    for (int j : sites)
      for (int l : sites) p(j, l) += std::conj(amp[static_cast<std::size_t>(j)]) * amp[static_cast<std::size_t>(l)];
  }
  return p;
}

namespace {

const ChannelCoupling& single_channel(const CouplingSet& couplings, const char* who) {
  if (couplings.channels.size() != 1)
    throw std::invalid_argument(std::string(who) + ": exact solvers take a two-level (single-channel) scheme");
  const auto& ch = couplings.channels.front();
  if (ch.gamma.rows() != couplings.size() || ch.gamma.rows() == 0)
    throw std::invalid_argument(std::string(who) + ": coupling matrix not built");
  return ch;
}

struct Observables {
  std::vector<MatrixXc> weights;  // per probe
  VectorX prefactor;
  const ChannelCoupling* channel;

  Observables(const ChannelCoupling& ch, const ArrayGeometry& geometry, const std::vector<DirectionalProbe>& probes)
      : prefactor(static_cast<Eigen::Index>(probes.size())), channel(&ch) {
    for (std::size_t i = 0; i < probes.size(); ++i) {
      if (probes[i].channel != 0) throw std::invalid_argument("exact: probe channel must be 0");
      weights.push_back(directional_weights(geometry, ch.wavenumber, probes[i].detector.direction));
      prefactor(static_cast<Eigen::Index>(i)) = directional_prefactor(ch, probes[i].detector);
    }
  }

  /// Row of [R, probe rates...] from pair expectations.
  void fill(const MatrixXc& p, Eigen::Ref<VectorX> out) const {
    out(0) = (channel->gamma.cast<complex>().cwiseProduct(p)).sum().real();
    for (std::size_t i = 0; i < weights.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      out(k + 1) = prefactor(k) * weights[i].cwiseProduct(p).sum().real();
    }
  }
};

std::vector<std::string> probe_keys(const ChannelCoupling& ch, const std::vector<DirectionalProbe>& probes) {
  std::vector<std::string> keys;
  for (const auto& p : probes) keys.push_back(p.label.empty() ? ch.key : p.label);
  return keys;
}

}  // namespace

EmissionRecord master_equation_evolve(const CouplingSet& couplings, const ArrayGeometry& geometry,
                                      const VectorX& t_grid, const ExactOptions& options) {
  const auto& ch = single_channel(couplings, "master_equation_evolve");
  const int atoms = couplings.size();
  if (atoms > 10) throw ResourceError("master_equation_evolve: N > 10");
  if (geometry.size() != atoms) throw std::invalid_argument("master_equation_evolve: geometry mismatch");
  if (t_grid.size() == 0 || t_grid(0) != 0.0) throw std::invalid_argument("master_equation_evolve: t_grid must start at 0");
  const ExcitationBasis basis(atoms);

  std::vector<MatrixXc> h(static_cast<std::size_t>(atoms) + 1);
  std::vector<Eigen::Index> offset(static_cast<std::size_t>(atoms) + 2, 0);
  for (int n = 0; n <= atoms; ++n) {
    h[static_cast<std::size_t>(n)] = MatrixXc(effective_hamiltonian_block(basis, ch, n));
    offset[static_cast<std::size_t>(n) + 1] = offset[static_cast<std::size_t>(n)] + basis.dim(n) * basis.dim(n);
  }
  // raise[n][x] = (site l, position of x | l in block n + 1) for l not in x.
  std::vector<std::vector<std::vector<std::pair<int, int>>>> raise(static_cast<std::size_t>(atoms));
  for (int n = 0; n < atoms; ++n) {
    const auto& block = basis.blocks[static_cast<std::size_t>(n)];
    auto& r = raise[static_cast<std::size_t>(n)];
    r.resize(block.size());
    for (std::size_t x = 0; x < block.size(); ++x)
      for (int l = 0; l < atoms; ++l)
        if (!(block[x] >> l & 1u)) r[x].emplace_back(l, basis.position[block[x] | (1u << l)]);
  }

  const MatrixX& gamma = ch.gamma;
  auto rhs = [&](double, const VectorXc& y, VectorXc& dy) {
    dy.resize(y.size());
    for (int n = 0; n <= atoms; ++n) {
      const auto sn = static_cast<std::size_t>(n);
      const Eigen::Index d = basis.dim(n);
      Eigen::Map<const MatrixXc> rho(y.data() + offset[sn], d, d);
      Eigen::Map<MatrixXc> drho(dy.data() + offset[sn], d, d);
      const MatrixXc hr = h[sn] * rho;
      drho.noalias() = -kI * (hr - hr.adjoint());  // rho H^dag = (H rho)^dag for Hermitian rho
      if (n == atoms) continue;
      const Eigen::Index du = basis.dim(n + 1);
      Eigen::Map<const MatrixXc> up(y.data() + offset[sn + 1], du, du);
      const auto& r = raise[sn];
      for (Eigen::Index yy = 0; yy < d; ++yy)
        for (Eigen::Index xx = 0; xx < d; ++xx) {
          complex s = 0.0;
          for (const auto& [l, big_x] : r[static_cast<std::size_t>(xx)])
            for (const auto& [j, big_y] : r[static_cast<std::size_t>(yy)]) s += gamma(j, l) * up(big_x, big_y);
          drho(xx, yy) += s;
        }
    }
  };

  const Observables obs(ch, geometry, options.probes);
  EmissionRecord rec;
  rec.allocate(t_grid, {ch.key}, probe_keys(ch, options.probes), false, true);
  VectorXc y0 = VectorXc::Zero(offset.back());
  y0(offset[static_cast<std::size_t>(atoms)]) = 1.0;
  DormandPrince<VectorXc> solver(rhs, options.tolerances);
  solver.reset(0.0, y0);
  VectorX row(1 + static_cast<Eigen::Index>(options.probes.size()));
  std::span<const double> times(t_grid.data(), static_cast<std::size_t>(t_grid.size()));
  integrate_samples(solver, times, [&](std::size_t i, double, const VectorXc& y) {
    MatrixXc p = MatrixXc::Zero(atoms, atoms);
    for (int n = 1; n <= atoms; ++n) {
      const auto sn = static_cast<std::size_t>(n);
      const Eigen::Index d = basis.dim(n);
      Eigen::Map<const MatrixXc> rho(y.data() + offset[sn], d, d);
      for (std::size_t x = 0; x < raise[sn - 1].size(); ++x) {
        const auto& r = raise[sn - 1][x];
        for (const auto& [j, xj] : r)
          for (const auto& [l, xl] : r) p(j, l) += rho(xl, xj);
      }
    }
    obs.fill(p, row);
    const auto k = static_cast<Eigen::Index>(i);
    rec.rates(k, 0) = row(0);
    rec.directional_rates.row(k) = row.tail(row.size() - 1).transpose();
    rec.excited(k) = p.diagonal().real().sum();
    return true;
  });
  return rec;
}

std::uint64_t trajectory_seed(std::uint64_t master_seed, std::uint64_t index) {
  std::uint64_t z = master_seed + (index + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {

struct JumpOperators {
  MatrixX coeff;  // column k: site coefficients of O_k
  VectorX rate;
  std::size_t clamped = 0;
};

JumpOperators jump_operators(const ChannelCoupling& ch, JumpBasis basis) {
  JumpOperators ops;
  if (basis == JumpBasis::Modes) {
    Eigen::SelfAdjointEigenSolver<MatrixX> solver(ch.gamma);
    ops.coeff = solver.eigenvectors();
    ops.rate = solver.eigenvalues();
  } else {
    Eigen::LDLT<MatrixX> ldlt(ch.gamma);
    const MatrixX l = ldlt.matrixL();
    ops.coeff = ldlt.transpositionsP().transpose() * l;
    ops.rate = ldlt.vectorD();
  }
  for (Eigen::Index k = 0; k < ops.rate.size(); ++k) {
    if (ops.rate(k) < 0.0) {
      if (ops.rate(k) < -1e-8 * ch.rate) ++ops.clamped;
      ops.rate(k) = 0.0;
    }
  }
  return ops;
}

struct TrajectoryResult {
  MatrixX values;  // samples x (1 + probes)
  int jumps = 0;
  bool restarted = false;
};

TrajectoryResult run_trajectory(const ExcitationBasis& basis, const std::vector<SparseC>& h,
                                const JumpOperators& ops, const Observables& obs, const VectorX& t_grid,
                                const OdeTolerances& tol, std::uint64_t seed) {
  const int atoms = basis.atoms;
  const Eigen::Index samples = t_grid.size();
  TrajectoryResult out;
  out.values = MatrixX::Zero(samples, obs.prefactor.size() + 1);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  int n = atoms;
  VectorXc psi = VectorXc::Ones(1);
  double t = 0.0;
  Eigen::Index next = 0;  // next sample to record
  VectorX row(out.values.cols());
  auto record = [&](Eigen::Index i, const VectorXc& state) {
    const double norm2 = state.squaredNorm();
    const MatrixXc p = pair_expectations(basis, n, state) / norm2;
    obs.fill(p, row);
    out.values.row(i) = row.transpose();
  };
  const double t_end = t_grid(samples - 1);
  ScopedFlushDenormals ftz;

  while (n > 0 && next < samples) {
    double u = uniform(rng);
    while (u < 1e-300) {
      u = uniform(rng);
      out.restarted = true;
    }
    const SparseC& hn = h[static_cast<std::size_t>(n)];
    DormandPrince<VectorXc> solver([&hn](double, const VectorXc& y, VectorXc& dy) { dy.noalias() = -kI * (hn * y); }, tol);
    solver.reset(t, psi);
    VectorXc tmp;
    double t_jump = -1.0;
    while (next < samples && t_grid(next) <= t) record(next++, psi);
    while (t_jump < 0.0 && solver.t() < t_end) {
      solver.step(t_end);
      const double lo0 = solver.t_prev(), hi0 = solver.t();
      if (solver.y().squaredNorm() <= u) {
        double lo = lo0, hi = hi0;
        for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
          const double mid = 0.5 * (lo + hi);
          solver.dense(mid, tmp);
          (tmp.squaredNorm() > u ? lo : hi) = mid;
        }
        t_jump = hi;
      }
      const double until = t_jump >= 0.0 ? t_jump : hi0;
      while (next < samples && t_grid(next) <= until) {
        solver.dense(t_grid(next), tmp);
        record(next++, tmp);
      }
    }
    if (t_jump < 0.0) break;  // reached the end of the grid without another jump

    solver.dense(t_jump, tmp);
    // Phi(x, l) = psi(x | l): lowering of site l applied to the pre-jump state.
    const auto& lower_block = basis.blocks[static_cast<std::size_t>(n - 1)];
    MatrixXc phi = MatrixXc::Zero(static_cast<Eigen::Index>(lower_block.size()), atoms);
    for (std::size_t x = 0; x < lower_block.size(); ++x)
      for (int l = 0; l < atoms; ++l)
        if (!(lower_block[x] >> l & 1u))
          phi(static_cast<Eigen::Index>(x), l) = tmp(basis.position[lower_block[x] | (1u << l)]);
    const MatrixXc branches = phi * ops.coeff.cast<complex>();
    VectorX weight = ops.rate.cwiseProduct(branches.colwise().squaredNorm().transpose());
    const double total = weight.sum();
    double pick = uniform(rng) * total;
    Eigen::Index k = 0;
    while (k + 1 < weight.size() && (pick -= weight(k)) > 0.0) ++k;
    while (weight(k) == 0.0 && k > 0) --k;  // never land on a zero-weight branch by round-off
    psi = branches.col(k) / branches.col(k).norm();
    --n;
    ++out.jumps;
    t = t_jump;
  }
  // Ground state or end of grid: remaining samples emit nothing (rows stay zero).
  if (n > 0) {
    while (next < samples) record(next++, psi);
  }
  return out;
}

}  // namespace

McwfResult mcwf_ensemble(const CouplingSet& couplings, const ArrayGeometry& geometry, const VectorX& t_grid,
                         const McwfOptions& options) {
  const auto& ch = single_channel(couplings, "mcwf_ensemble");
  const int atoms = couplings.size();
  if (atoms > 16) throw ResourceError("mcwf_ensemble: N > 16");
  if (options.trajectories == 0) throw std::invalid_argument("mcwf_ensemble: need at least one trajectory");
  if (geometry.size() != atoms) throw std::invalid_argument("mcwf_ensemble: geometry mismatch");
  if (t_grid.size() == 0 || t_grid(0) != 0.0) throw std::invalid_argument("mcwf_ensemble: t_grid must start at 0");

  const ExcitationBasis basis(atoms);
  std::vector<SparseC> h;
  for (int n = 0; n <= atoms; ++n) h.push_back(effective_hamiltonian_block(basis, ch, n));
  const JumpOperators ops = jump_operators(ch, options.basis);
  if (ops.clamped > 0)
    std::cerr << "warning: mcwf_ensemble clamped " << ops.clamped << " negative jump rate(s) to zero\n";
  const Observables obs(ch, geometry, options.probes);

  std::vector<TrajectoryResult> runs(options.trajectories);
  parallel_for(options.trajectories, options.threads, [&](std::size_t i) {
    runs[i] = run_trajectory(basis, h, ops, obs, t_grid, options.tolerances, trajectory_seed(options.seed, i));
  });

  McwfResult result;
  auto& rec = result.record;
  rec.allocate(t_grid, {ch.key}, probe_keys(ch, options.probes), true, false);
  const Eigen::Index cols = 1 + static_cast<Eigen::Index>(options.probes.size());
  MatrixX sum = MatrixX::Zero(t_grid.size(), cols), sum2 = sum;
  for (const auto& r : runs) {  // fixed order
    sum += r.values;
    sum2 += r.values.cwiseProduct(r.values);
    result.jumps.push_back(r.jumps);
    result.restarts += r.restarted ? 1 : 0;
  }
  const double m = static_cast<double>(options.trajectories);
  const MatrixX mean = sum / m;
  MatrixX err = MatrixX::Zero(mean.rows(), mean.cols());
  if (options.trajectories > 1)
    err = ((sum2 / m - mean.cwiseProduct(mean)).cwiseMax(0.0) * (m / (m - 1.0)) / m).cwiseSqrt();
  rec.rates.col(0) = mean.col(0);
  rec.rates_stderr.col(0) = err.col(0);
  rec.total_stderr = err.col(0);
  rec.directional_rates = mean.rightCols(cols - 1);
  rec.directional_stderr = err.rightCols(cols - 1);
  result.clamped_modes = ops.clamped;
  return result;
}

}  // namespace superburst
