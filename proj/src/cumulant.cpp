#include "superburst/cumulant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace superburst {

CumulantState init_fully_excited(int atoms, std::size_t channels) {
  if (atoms < 1) throw std::invalid_argument("init_fully_excited: N must be >= 1");
  if (channels < 1) throw std::invalid_argument("init_fully_excited: need at least one channel");
  const Eigen::Index n = atoms;
  CumulantState s;
  s.a = VectorX::Ones(n);
  s.b.assign(channels, VectorX::Zero(n));
  s.e = MatrixX::Ones(n, n);
  s.e.diagonal().setZero();
  s.f.assign(channels, MatrixX::Zero(n, n));
  s.q.assign(channels, MatrixXc::Zero(n, n));
  return s;
}

std::vector<ChannelConstants> channel_constants(const CouplingSet& couplings) {
  std::vector<ChannelConstants> out;
  const int n = couplings.size();
  for (const auto& ch : couplings.channels) {
    if (ch.gamma.rows() != n)
      throw std::invalid_argument("channel_constants: coupling matrix of '" + ch.key + "' not built");
    ChannelConstants k;
    k.rate = ch.rate;
    k.correlated = ch.correlated && ch.rate > 0.0;
    k.gamma = ch.gamma;
    k.c = ch.coherent.cast<complex>() - 0.5 * kI * ch.gamma.cast<complex>();
    k.c_offdiag = k.c;
    k.c_offdiag.diagonal().setZero();
    out.push_back(std::move(k));
  }
  return out;
}

void complete_last_channel(CumulantState& s) {
  const std::size_t last = s.channels() - 1;
  s.b[last] = VectorX::Ones(s.a.size()) - s.a;
  s.f[last] = s.a.rowwise().replicate(s.a.size()) - s.e;
  for (std::size_t c = 0; c < last; ++c) {
    s.b[last] -= s.b[c];
    s.f[last] -= s.f[c];
  }
  s.f[last].diagonal().setZero();
}

namespace {

double imag_part(const complex& z) { return z.imag(); }

void check_dimensions(const CumulantState& s, const std::vector<ChannelConstants>& constants) {
  if (constants.size() != s.channels() || s.f.size() != s.channels() || s.q.size() != s.channels())
    throw std::invalid_argument("cumulant_rhs: channel count mismatch");
  for (const auto& k : constants) {
    if (k.c.rows() != s.a.size()) throw std::invalid_argument("cumulant_rhs: dimension mismatch");
  }
}

}  // namespace

CumulantState cumulant_rhs(const CumulantState& s, const std::vector<ChannelConstants>& constants) {
  check_dimensions(s, constants);
  const Eigen::Index n = s.a.size();
  const std::size_t k = s.channels();
  double total = 0.0;
  for (const auto& c : constants) total += c.rate;

  CumulantState full = s;
  complete_last_channel(full);

  // W^c_jl = 2 Im(T^c_j - C_jl q_jl), T^c_j = sum_m C~_jm q_jm.
  std::vector<MatrixX> w(k);
  std::vector<VectorX> two_im_t(k);
  std::vector<MatrixX> two_im_cq(k);
  MatrixX w_sum = MatrixX::Zero(n, n);
  for (std::size_t c = 0; c < k; ++c) {
    if (!constants[c].correlated) {
      w[c] = MatrixX::Zero(n, n);
      two_im_t[c] = VectorX::Zero(n);
      two_im_cq[c] = MatrixX::Zero(n, n);
      continue;
    }
    const MatrixXc cq = constants[c].c.cwiseProduct(full.q[c]);
    two_im_cq[c] = 2.0 * cq.unaryExpr(&imag_part);
    two_im_t[c] = 2.0 * cq.rowwise().sum().unaryExpr(&imag_part);  // diag of q is zero
    w[c] = two_im_t[c].rowwise().replicate(n) - two_im_cq[c];
    w_sum += w[c];
  }

  CumulantState d;
  d.a = -total * full.a;
  for (std::size_t c = 0; c < k; ++c) d.a += two_im_t[c];

  d.b.resize(k);
  for (std::size_t c = 0; c < k; ++c) d.b[c] = constants[c].rate * full.a - two_im_t[c];

  const MatrixX wa = w_sum * full.a.asDiagonal();  // W_jl a_l
  d.e = -2.0 * total * full.e + wa + wa.transpose();
  d.e.diagonal().setZero();

  d.f.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    d.f[c] = -total * full.f[c] + constants[c].rate * full.e + two_im_cq[c] +
             w_sum * full.b[c].asDiagonal() - full.a.asDiagonal() * w[c].transpose();
    d.f[c].diagonal().setZero();
  }

  d.q.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    if (!constants[c].correlated) {
      d.q[c] = MatrixXc::Zero(n, n);
      continue;
    }
    const auto& cc = constants[c].c;
    const MatrixXc cstar_q = constants[c].c_offdiag.conjugate() * full.q[c];  // sum_m C~*_jm q_ml
    const VectorXc left = kI * (full.b[c] - full.a).cast<complex>();
    const VectorXc right = kI * (full.a - full.b[c]).cast<complex>();
    d.q[c] = -total * full.q[c] +
             kI * cc.conjugate().cwiseProduct(full.f[c].transpose().cast<complex>()) -
             kI * cc.cwiseProduct(full.f[c].cast<complex>()) +
             constants[c].gamma.cwiseProduct(full.e).cast<complex>() +
             left.asDiagonal() * cstar_q + cstar_q.adjoint() * right.asDiagonal();
    d.q[c].diagonal().setZero();
  }
  return d;
}

double channel_rate(const CumulantState& s, const ChannelConstants& k, std::size_t channel) {
  double r = k.rate * s.a.sum();
  if (k.correlated) r += k.gamma.cwiseProduct(s.q[channel].real()).sum();
  return r;
}

double directional_prefactor(const ChannelCoupling& channel, const Detector& detector) {
  const double overlap = std::norm(channel.polarization.conjugate().dot(detector.direction.cast<complex>()));
  return 3.0 * channel.rate / (8.0 * kPi) * std::max(0.0, 1.0 - overlap);
}

double directional_rate(const CumulantState& s, const CouplingSet& couplings, const ArrayGeometry& geometry,
                        std::size_t channel, const Detector& detector) {
  const auto& ch = couplings.channels.at(channel);
  double sum = s.a.sum();
  if (ch.correlated) {
    const MatrixXc w = directional_weights(geometry, ch.wavenumber, detector.direction);
    sum += w.cwiseProduct(s.q[channel]).sum().real();
  }
  return directional_prefactor(ch, detector) * sum;
}

CumulantLayout::CumulantLayout(int atoms, const std::vector<ChannelConstants>& constants)
    : n_(atoms), k_(constants.size()) {
  if (k_ == 0) throw std::invalid_argument("CumulantLayout: no channels");
  for (const auto& c : constants) correlated_.push_back(c.correlated);
  const Eigen::Index n = n_;
  const Eigen::Index pairs = n * (n - 1) / 2;
  size_ = n + static_cast<Eigen::Index>(k_ - 1) * n + pairs + static_cast<Eigen::Index>(k_ - 1) * 2 * pairs;
  for (bool c : correlated_) size_ += c ? 2 * pairs : 0;
}

void CumulantLayout::pack(const CumulantState& s, VectorX& y) const {
  y.resize(size_);
  const Eigen::Index n = n_;
  Eigen::Index p = 0;
  y.segment(p, n) = s.a;
  p += n;
  for (std::size_t c = 0; c + 1 < k_; ++c, p += n) y.segment(p, n) = s.b[c];
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index l = j + 1; l < n; ++l) y(p++) = s.e(j, l);
  for (std::size_t c = 0; c + 1 < k_; ++c)
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index l = 0; l < n; ++l)
        if (l != j) y(p++) = s.f[c](j, l);
  for (std::size_t c = 0; c < k_; ++c) {
    if (!correlated_[c]) continue;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index l = j + 1; l < n; ++l) {
        y(p++) = s.q[c](j, l).real();
        y(p++) = s.q[c](j, l).imag();
      }
  }
}

void CumulantLayout::unpack(const VectorX& y, CumulantState& s) const {
  const Eigen::Index n = n_;
  if (s.a.size() != n || s.channels() != k_) s = init_fully_excited(n_, k_);
  Eigen::Index p = 0;
  s.a = y.segment(p, n);
  p += n;
  for (std::size_t c = 0; c + 1 < k_; ++c, p += n) s.b[c] = y.segment(p, n);
  s.e.diagonal().setZero();
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index l = j + 1; l < n; ++l) s.e(j, l) = s.e(l, j) = y(p++);
  for (std::size_t c = 0; c + 1 < k_; ++c) {
    s.f[c].diagonal().setZero();
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index l = 0; l < n; ++l)
        if (l != j) s.f[c](j, l) = y(p++);
  }
  for (std::size_t c = 0; c < k_; ++c) {
    s.q[c].setZero();
    if (!correlated_[c]) continue;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index l = j + 1; l < n; ++l) {
        const complex z(y(p), y(p + 1));
        p += 2;
        s.q[c](j, l) = z;
        s.q[c](l, j) = std::conj(z);
      }
  }
  complete_last_channel(s);
}

namespace {

double population_violation(const CumulantState& s, double tol) {
  double worst = 0.0;
  auto check = [&](double lo, double hi) {
    worst = std::max(worst, std::max(-lo, hi - 1.0) - tol);
  };
  check(s.a.minCoeff(), s.a.maxCoeff());
  for (const auto& b : s.b) check(b.minCoeff(), b.maxCoeff());
  if (s.a.size() > 1) {
    check(s.e.minCoeff(), s.e.maxCoeff());
    for (const auto& f : s.f) check(f.minCoeff(), f.maxCoeff());
  }
  return std::max(0.0, worst);
}

// Shared sampling loop: `observe` fills row i from the packed state.
template <typename Rhs, typename Observe>
void run_sampled(Rhs&& rhs, const VectorX& y0, const VectorX& t_grid, const CumulantOptions& options,
                 EmissionRecord& rec, Observe&& observe) {
  if (t_grid.size() == 0 || t_grid(0) != 0.0) throw std::invalid_argument("cumulant: t_grid must start at 0");
  DormandPrince<VectorX> solver(std::forward<Rhs>(rhs), options.tolerances);
  solver.reset(0.0, y0);
  const Eigen::Index cols = rec.rates.cols() + rec.directional_rates.cols();
  VectorX peak = VectorX::Zero(cols);
  std::span<const double> times(t_grid.data(), static_cast<std::size_t>(t_grid.size()));
  std::size_t delivered = 0;
  try {
    delivered = integrate_samples(solver, times, [&](std::size_t i, double, const VectorX& y) {
      const auto row = static_cast<Eigen::Index>(i);
      observe(row, y);
      if (options.stop_after_peak_fraction <= 0.0 || row == 0) return true;
      VectorX now(cols), before(cols);
      now << rec.rates.row(row).transpose(), rec.directional_rates.row(row).transpose();
      before << rec.rates.row(row - 1).transpose(), rec.directional_rates.row(row - 1).transpose();
      peak = peak.cwiseMax(now);
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (now(c) >= before(c) || now(c) > options.stop_after_peak_fraction * peak(c)) return true;
      }
      return false;
    });
  } catch (const IntegrationFailure& e) {
    rec.partial = true;
    rec.failure = e.what();
    Eigen::Index kept = 0;
    while (kept < t_grid.size() && t_grid(kept) <= solver.t()) ++kept;
    delivered = static_cast<std::size_t>(kept);
  }
  rec.truncate(static_cast<Eigen::Index>(delivered));
}

std::vector<std::string> probe_keys(const CouplingSet& couplings, const CumulantOptions& options) {
  std::vector<std::string> keys;
  for (const auto& p : options.probes) {
    if (p.channel >= couplings.channels.size()) throw std::invalid_argument("cumulant: probe channel out of range");
    keys.push_back(p.label.empty() ? couplings.channels[p.channel].key : p.label);
  }
  return keys;
}

}  // namespace

EmissionRecord evolve_cumulant(const CouplingSet& couplings, const ArrayGeometry& geometry,
                               const VectorX& t_grid, const CumulantOptions& options) {
  const int n = couplings.size();
  if (geometry.size() != n) throw std::invalid_argument("evolve_cumulant: geometry mismatch");
  const auto constants = channel_constants(couplings);
  const CumulantLayout layout(n, constants);

  std::vector<std::string> keys;
  for (const auto& ch : couplings.channels) keys.push_back(ch.key);
  EmissionRecord rec;
  rec.allocate(t_grid, keys, probe_keys(couplings, options), false, true);

  std::vector<MatrixXc> probe_weights;
  VectorX probe_prefactor(static_cast<Eigen::Index>(options.probes.size()));
  for (std::size_t i = 0; i < options.probes.size(); ++i) {
    const auto& p = options.probes[i];
    const auto& ch = couplings.channels[p.channel];
    probe_weights.push_back(directional_weights(geometry, ch.wavenumber, p.detector.direction));
    probe_prefactor(static_cast<Eigen::Index>(i)) = directional_prefactor(ch, p.detector);
  }

  CumulantState work = init_fully_excited(n, constants.size());
  auto rhs = [&layout, &constants, work](double, const VectorX& y, VectorX& dy) mutable {
    layout.unpack(y, work);
    layout.pack(cumulant_rhs(work, constants), dy);
  };
  VectorX y0;
  layout.pack(init_fully_excited(n, constants.size()), y0);

  CumulantState sample = init_fully_excited(n, constants.size());
  double worst = 0.0;
  run_sampled(rhs, y0, t_grid, options, rec, [&](Eigen::Index row, const VectorX& y) {
    layout.unpack(y, sample);
    for (std::size_t c = 0; c < constants.size(); ++c)
      rec.rates(row, static_cast<Eigen::Index>(c)) = channel_rate(sample, constants[c], c);
    for (std::size_t i = 0; i < options.probes.size(); ++i) {
      const auto& p = options.probes[i];
      double sum = sample.a.sum();
      if (constants[p.channel].correlated)
        sum += probe_weights[i].cwiseProduct(sample.q[p.channel]).sum().real();
      rec.directional_rates(row, static_cast<Eigen::Index>(i)) = probe_prefactor(static_cast<Eigen::Index>(i)) * sum;
    }
    rec.excited(row) = sample.a.sum();
    worst = std::max(worst, population_violation(sample, options.positivity_tol));
  });
  rec.positivity_violation = worst;
  return rec;
}

EmissionRecord evolve_cumulant_two_level(const ChannelCoupling& channel, const ArrayGeometry& geometry,
                                         const VectorX& t_grid, const CumulantOptions& options) {
  const Eigen::Index n = channel.gamma.rows();
  if (geometry.size() != n) throw std::invalid_argument("evolve_cumulant_two_level: geometry mismatch");
  const double g0 = channel.rate;
  const MatrixXc c = channel.coherent.cast<complex>() - 0.5 * kI * channel.gamma.cast<complex>();
  const Eigen::Index pairs = n * (n - 1) / 2;

  // y = [a | e_{j<l} | (Re q, Im q)_{j<l}], written out with explicit index sums.
  auto unpack = [n](const VectorX& y, VectorX& a, MatrixX& e, MatrixXc& q) {
    a = y.head(n);
    e.setZero(n, n);
    q.setZero(n, n);
    Eigen::Index p = n;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index l = j + 1; l < n; ++l) e(j, l) = e(l, j) = y(p++);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index l = j + 1; l < n; ++l) {
        q(j, l) = complex(y(p), y(p + 1));
        q(l, j) = std::conj(q(j, l));
        p += 2;
      }
  };
  auto rhs = [&, n](double, const VectorX& y, VectorX& dy) {
    VectorX a;
    MatrixX e;
    MatrixXc q;
    unpack(y, a, e, q);
    dy.resize(y.size());
    VectorXc t = VectorXc::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index m = 0; m < n; ++m)
        if (m != j) t(j) += c(j, m) * q(j, m);
    for (Eigen::Index j = 0; j < n; ++j) dy(j) = -g0 * a(j) + 2.0 * t(j).imag();
    Eigen::Index p = n;
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index l = j + 1; l < n; ++l) {
        const double w_jl = 2.0 * (t(j) - c(j, l) * q(j, l)).imag();
        const double w_lj = 2.0 * (t(l) - c(l, j) * q(l, j)).imag();
        dy(p++) = -2.0 * g0 * e(j, l) + w_jl * a(l) + w_lj * a(j);
      }
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index l = j + 1; l < n; ++l) {
        complex left = 0.0, right = 0.0;
        for (Eigen::Index m = 0; m < n; ++m) {
          if (m == j || m == l) continue;
          left += std::conj(c(j, m)) * q(m, l);
          right += q(j, m) * c(m, l);
        }
        const complex dq = -g0 * q(j, l) + kI * std::conj(c(j, l)) * (a(l) - e(j, l)) -
                           kI * c(j, l) * (a(j) - e(j, l)) + channel.gamma(j, l) * e(j, l) +
                           kI * (1.0 - 2.0 * a(j)) * left + kI * (2.0 * a(l) - 1.0) * right;
        dy(p++) = dq.real();
        dy(p++) = dq.imag();
      }
  };

  VectorX y0 = VectorX::Zero(n + pairs + 2 * pairs);
  y0.head(n).setOnes();
  y0.segment(n, pairs).setOnes();

  EmissionRecord rec;
  std::vector<std::string> probes;
  for (const auto& p : options.probes) probes.push_back(p.label.empty() ? channel.key : p.label);
  rec.allocate(t_grid, {channel.key}, probes, false, true);
  std::vector<MatrixXc> probe_weights;
  for (const auto& p : options.probes)
    probe_weights.push_back(directional_weights(geometry, channel.wavenumber, p.detector.direction));

  VectorX a;
  MatrixX e;
  MatrixXc q;
  run_sampled(rhs, y0, t_grid, options, rec, [&](Eigen::Index row, const VectorX& y) {
    unpack(y, a, e, q);
    double r = g0 * a.sum();
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index l = j + 1; l < n; ++l) r += 2.0 * channel.gamma(j, l) * q(j, l).real();
    rec.rates(row, 0) = r;
    for (std::size_t i = 0; i < options.probes.size(); ++i) {
      const double sum = a.sum() + probe_weights[i].cwiseProduct(q).sum().real();
      rec.directional_rates(row, static_cast<Eigen::Index>(i)) =
          directional_prefactor(channel, options.probes[i].detector) * sum;
    }
    rec.excited(row) = a.sum();
  });
  return rec;
}

}  // namespace superburst
