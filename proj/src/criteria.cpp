#include "superburst/criteria.hpp"

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <ostream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "superburst/parallel.hpp"

namespace superburst {

namespace {

const ChannelCoupling& checked_channel(const CouplingSet& couplings, std::size_t channel) {
  if (channel >= couplings.channels.size())
    throw std::invalid_argument("criteria: channel index out of range");
  const auto& ch = couplings.channels[channel];
  if (!(ch.rate > 0.0)) throw std::invalid_argument("criteria: channel '" + ch.key + "' has zero rate");
  if (ch.gamma.rows() == 0)
    throw std::invalid_argument("criteria: coupling matrix of channel '" + ch.key + "' not built");
  return ch;
}

double total_rate(const CouplingSet& couplings) {
  double sum = 0.0;
  for (const auto& ch : couplings.channels) sum += ch.rate;
  return sum;
}

}  // namespace

CriterionResult variance_criterion(const CouplingSet& couplings, std::size_t channel) {
  const auto& ch = checked_channel(couplings, channel);
  const double n = static_cast<double>(ch.gamma.rows());
  CriterionResult r;
  r.channel = ch.key;
  r.value = spectrum_square_sum(ch) / (ch.rate * ch.rate * n) - 1.0;
  r.threshold = total_rate(couplings) / ch.rate;
  r.burst_predicted = r.value > r.threshold;
  return r;
}

CriterionResult directional_criterion(const CouplingSet& couplings, const ArrayGeometry& geometry,
                                      std::size_t channel, const Detector& detector) {
  const auto& ch = checked_channel(couplings, channel);
  if (geometry.size() != ch.gamma.rows())
    throw std::invalid_argument("directional_criterion: geometry does not match couplings");
  const VectorX phase = ch.wavenumber * (geometry.positions.transpose() * detector.direction);
  const VectorXc v = phase.unaryExpr([](double x) { return std::polar(1.0, x); });
  const complex form = v.dot(ch.gamma.cast<complex>() * v);  // sum_jl e^{ik R.(r_l - r_j)} Gamma_jl
  const double n = static_cast<double>(geometry.size());
  CriterionResult r;
  r.channel = ch.key;
  r.detector = detector;
  r.value = form.real() / (n * (ch.rate + total_rate(couplings)));
  r.threshold = 1.0;
  r.burst_predicted = r.value > r.threshold;
  return r;
}

double g2_from_criterion(const CouplingSet& couplings, std::size_t channel,
                         const CriterionResult& result) {
  const auto& ch = checked_channel(couplings, channel);
  const double n = static_cast<double>(ch.gamma.rows());
  const double g0 = total_rate(couplings);
  if (result.detector) return 1.0 + (ch.rate + g0) * (result.value - 1.0) / (n * g0);
  return 1.0 + ch.rate / (n * g0) * (result.value - g0 / ch.rate);
}

namespace {

// Product-basis configurations: 4 bits per site, 0 = excited, b + 1 = ground state of channel b.
using Config = std::uint64_t;
using SparseState = std::map<Config, complex>;

struct Lowering {
  double rate;
  VectorXc coeff;
  unsigned ground;  // site code after the jump
};

SparseState apply(const Lowering& op, const SparseState& psi) {
  SparseState out;
  for (const auto& [config, amp] : psi) {
    for (Eigen::Index l = 0; l < op.coeff.size(); ++l) {
      const unsigned shift = 4 * static_cast<unsigned>(l);
      if (((config >> shift) & 0xFu) != 0u) continue;
      if (op.coeff(l) == complex(0.0)) continue;
      out[config | (Config(op.ground) << shift)] += op.coeff(l) * amp;
    }
  }
  return out;
}

double norm2(const SparseState& psi) {
  double s = 0.0;
  for (const auto& [config, amp] : psi) s += std::norm(amp);
  return s;
}

std::vector<Lowering> mode_operators(const ChannelCoupling& ch, unsigned ground) {
  std::vector<Lowering> ops;
  if (!(ch.rate > 0.0)) return ops;
  VectorX spectrum = ch.spectrum;
  MatrixX modes = ch.modes;
  if (!ch.has_spectrum()) {
    Eigen::SelfAdjointEigenSolver<MatrixX> solver(ch.gamma);
    spectrum = solver.eigenvalues();
    modes = solver.eigenvectors();
  }
  for (Eigen::Index nu = 0; nu < spectrum.size(); ++nu) {
    ops.push_back({spectrum(nu), modes.col(nu).cast<complex>(), ground});
  }
  return ops;
}

}  // namespace

double brute_force_g2(const CouplingSet& couplings, const ArrayGeometry& geometry,
                      std::size_t channel, const std::optional<Detector>& detector) {
  const auto& ch = checked_channel(couplings, channel);
  const int n = couplings.size();
  if (n > 12) throw ResourceError("brute_force_g2: N > 12 is outside the exact-evaluation limit");
  if (couplings.channels.size() > 14) throw ResourceError("brute_force_g2: too many channels");
  if (geometry.size() != n) throw std::invalid_argument("brute_force_g2: geometry mismatch");

  std::vector<Lowering> emitters;
  for (std::size_t b = 0; b < couplings.channels.size(); ++b) {
    const auto& other = couplings.channels[b];
    if (other.rate > 0.0 && other.gamma.rows() != n)
      throw std::invalid_argument("brute_force_g2: coupling matrix of channel '" + other.key +
                                  "' not built");
    auto ops = mode_operators(other, static_cast<unsigned>(b + 1));
    emitters.insert(emitters.end(), ops.begin(), ops.end());
  }
  std::vector<Lowering> detected;
  if (detector) {
    const VectorX phase = -ch.wavenumber * (geometry.positions.transpose() * detector->direction);
    detected.push_back({1.0, phase.unaryExpr([](double x) { return std::polar(1.0, x); }),
                        static_cast<unsigned>(channel + 1)});
  } else {
    detected = mode_operators(ch, static_cast<unsigned>(channel + 1));
  }

  const SparseState excited{{Config(0), complex(1.0)}};
  double emitted = 0.0, detected_rate = 0.0, joint = 0.0;
  for (const auto& d : detected) detected_rate += d.rate * norm2(apply(d, excited));
  for (const auto& e : emitters) {
    const SparseState after = apply(e, excited);
    emitted += e.rate * norm2(after);
    for (const auto& d : detected) joint += e.rate * d.rate * norm2(apply(d, after));
  }
  return joint / (emitted * detected_rate);
}

std::vector<double> SweepCurve::crossings() const {
  std::vector<double> out;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].result.burst_predicted != points[i - 1].result.burst_predicted)
      out.push_back(0.5 * (points[i].d_nm + points[i - 1].d_nm));
  }
  return out;
}

std::vector<std::pair<double, double>> SweepCurve::burst_intervals() const {
  std::vector<std::pair<double, double>> out;
  bool open = false;
  double begin = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const bool b = points[i].result.burst_predicted;
    if (b && !open) {
      begin = i == 0 ? points[i].d_nm : 0.5 * (points[i].d_nm + points[i - 1].d_nm);
      open = true;
    } else if (!b && open) {
      out.emplace_back(begin, 0.5 * (points[i].d_nm + points[i - 1].d_nm));
      open = false;
    }
  }
  if (open) out.emplace_back(begin, points.back().d_nm);
  return out;
}

SweepCurve criterion_sweep(const LevelScheme& scheme, const SweepRequest& request) {
  if (!(request.step_nm > 0.0)) throw std::invalid_argument("criterion_sweep: step must be positive");
  if (!(request.d_max_nm >= request.d_min_nm) || !(request.d_min_nm > 0.0))
    throw std::invalid_argument("criterion_sweep: need 0 < d_min <= d_max");
  if (request.channel >= scheme.channels.size())
    throw std::invalid_argument("criterion_sweep: channel index out of range");
  // Grid points from an integer count so endpoints do not drift with accumulated round-off.
  const auto count =
      static_cast<std::size_t>(std::floor((request.d_max_nm - request.d_min_nm) / request.step_nm + 1e-9)) + 1;
  SweepCurve curve;
  curve.points.resize(count);
  CouplingOptions opts;
  opts.with_spectrum = false;
  opts.only_channel = request.channel;
  parallel_for(count, request.threads, [&](std::size_t i) {
    const double d = request.d_min_nm + static_cast<double>(i) * request.step_nm;
    const auto geometry = square_lattice(request.n_x, request.n_y, d);
    const auto couplings = coupling_matrices(geometry, scheme, opts);
    curve.points[i].d_nm = d;
    curve.points[i].result =
        request.detector ? directional_criterion(couplings, geometry, request.channel, *request.detector)
                         : variance_criterion(couplings, request.channel);
  });
  return curve;
}

void write_sweep_csv(std::ostream& os, const SweepCurve& curve) {
  os << std::setprecision(17);
  os << "d_nm,channel,value,threshold,burst,theta,phi\n";
  for (const auto& p : curve.points) {
    const auto& r = p.result;
    os << p.d_nm << ',' << r.channel << ',' << r.value << ',' << r.threshold << ','
       << (r.burst_predicted ? 1 : 0) << ',';
    if (r.detector) os << r.detector->theta << ',' << r.detector->phi;
    else os << ',';
    os << '\n';
  }
}

}  // namespace superburst
