#include "superburst/interactions.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace superburst {

PairKernel<double> greens_coupling(const Vector3& r_vec, const DecayChannel& channel) {
  const double r = r_vec.norm();
  if (!(r > 0.0)) {
    throw std::domain_error("greens_coupling: zero displacement (use the single-atom rate)");
  }
  const Vector3 r_hat = r_vec / r;
  const double p = std::norm(channel.polarization.conjugate().dot(r_hat.cast<complex>()));
  auto k = dipole_kernel(channel.wavenumber * r, p);
  return {k.coherent * channel.rate, k.dissipative * channel.rate};
}

namespace {

ChannelCoupling channel_coupling(const ArrayGeometry& geometry, const DecayChannel& channel,
                                 double total_rate, bool build, bool with_spectrum) {
  const Eigen::Index n = geometry.size();
  ChannelCoupling out;
  out.key = channel.key;
  out.label = channel.label;
  out.rate = channel.rate / total_rate;
  out.wavenumber = channel.wavenumber;
  out.polarization = channel.polarization;
  out.correlated = channel.correlated;
  if (!build) return out;

  out.gamma = MatrixX::Zero(n, n);
  out.coherent = MatrixX::Zero(n, n);
  out.gamma.diagonal().setConstant(out.rate);
  if (channel.correlated) {
    const Vector3c dstar = channel.polarization.conjugate();
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index l = j + 1; l < n; ++l) {
        const Vector3 r_vec = geometry.positions.col(j) - geometry.positions.col(l);
        const double r = r_vec.norm();
        if (!(r > 0.0)) {
          throw std::domain_error(
              "coupling_matrices: coincident atoms; atoms at a single point are handled by the "
              "permutation-symmetric point model (dicke_point)");
        }
        const double p = std::norm(dstar.dot((r_vec / r).cast<complex>()));
        const auto k = dipole_kernel(channel.wavenumber * r, p);
        out.gamma(j, l) = out.gamma(l, j) = out.rate * k.dissipative;
        out.coherent(j, l) = out.coherent(l, j) = out.rate * k.coherent;
      }
    }
  }
  if (with_spectrum) {
    Eigen::SelfAdjointEigenSolver<MatrixX> solver(out.gamma);
    // Eigen returns ascending order.
    out.spectrum = solver.eigenvalues().reverse();
    out.modes = solver.eigenvectors().rowwise().reverse();
  }
  return out;
}

}  // namespace

CouplingSet coupling_matrices(const ArrayGeometry& geometry, const LevelScheme& scheme,
                              const CouplingOptions& options) {
  if (geometry.size() < 1) throw std::invalid_argument("coupling_matrices: empty geometry");
  if (!(scheme.total_rate > 0.0)) throw std::invalid_argument("coupling_matrices: zero total rate");
  CouplingSet set;
  set.total_rate_si = scheme.total_rate;
  for (std::size_t a = 0; a < scheme.channels.size(); ++a) {
    const bool build = !options.only_channel || *options.only_channel == a;
    set.channels.push_back(channel_coupling(geometry, scheme.channels[a], scheme.total_rate, build,
                                            options.with_spectrum));
  }
  return set;
}

double spectrum_square_sum(const ChannelCoupling& channel) { return channel.gamma.squaredNorm(); }

MatrixXc directional_weights(const ArrayGeometry& geometry, double wavenumber,
                             const Vector3& direction) {
  const VectorX phase = wavenumber * (geometry.positions.transpose() * direction);
  const VectorXc amp = phase.unaryExpr([](double x) { return std::polar(1.0, x); });
  return amp * amp.adjoint();
}

void write_coupling_csv(std::ostream& os, const CouplingSet& couplings) {
  const int n = couplings.size();
  os << std::setprecision(17);
  os << "# superburst coupling dump: N=" << n << " total_rate_si=" << couplings.total_rate_si
     << "; per channel: 'channel,<key>,<rate>' then N rows 'gamma_j0..gamma_jN-1' then N rows "
        "'J_j0..J_jN-1' then one row of the spectrum (descending). Units of total rate.\n";
  for (const auto& ch : couplings.channels) {
    os << "channel," << ch.key << ',' << ch.rate << '\n';
    auto row_out = [&](const auto& m) {
      for (Eigen::Index j = 0; j < m.rows(); ++j) {
        for (Eigen::Index l = 0; l < m.cols(); ++l) os << (l ? "," : "") << m(j, l);
        os << '\n';
      }
    };
    row_out(ch.gamma);
    row_out(ch.coherent);
    for (Eigen::Index nu = 0; nu < ch.spectrum.size(); ++nu) os << (nu ? "," : "") << ch.spectrum(nu);
    os << '\n';
  }
}

}  // namespace superburst
