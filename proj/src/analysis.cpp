#include "superburst/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace superburst {

Peak find_peak(const VectorX& t, const VectorX& y) {
  if (y.size() == 0 || t.size() != y.size()) throw std::invalid_argument("find_peak: empty or mismatched series");
  Peak p;
  y.maxCoeff(&p.index);
  p.value = y(p.index);
  p.t = t(p.index);
  if (p.index == 0) {
    p.t = 0.0;
    p.burst = false;
    return p;
  }
  p.burst = true;
  if (p.index + 1 < y.size()) {
    const Eigen::Index i = p.index;
    // Lagrange parabola through three (possibly non-uniform) samples.
    const double x0 = t(i - 1), x1 = t(i), x2 = t(i + 1);
    const double y0 = y(i - 1), y1 = y(i), y2 = y(i + 1);
    const double d01 = (y1 - y0) / (x1 - x0);
    const double d12 = (y2 - y1) / (x2 - x1);
    const double c2 = (d12 - d01) / (x2 - x0);
    if (c2 < 0.0) {
      const double c1 = d01 - c2 * (x0 + x1);
      const double tv = -c1 / (2.0 * c2);
      if (tv >= x0 && tv <= x2) {
        p.t = tv;
        p.value = y0 + d01 * (tv - x0) + c2 * (tv - x0) * (tv - x1);
      }
    }
  }
  return p;
}

Peak find_peak(const EmissionRecord& record, const std::string& channel) {
  if (channel == "total") return find_peak(record.t, record.total());
  for (std::size_t k = 0; k < record.directional.size(); ++k) {
    if ("dir_" + record.directional[k] == channel)
      return find_peak(record.t, record.directional_rates.col(static_cast<Eigen::Index>(k)));
  }
  return find_peak(record.t, record.rates.col(record.channel_index(channel)));
}

namespace {

struct LineFit {
  double slope, intercept, rms;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<Eigen::Index>(x.size());
  MatrixX design(n, 2);
  VectorX rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = x[static_cast<std::size_t>(i)];
    rhs(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
  const VectorX resid = design * coef - rhs;
  return {coef(1), coef(0), std::sqrt(resid.squaredNorm() / static_cast<double>(n))};
}

}  // namespace

FitResult fit_power_law(const std::vector<std::pair<double, double>>& points, double n_min) {
  std::vector<double> lx, ly;
  FitResult r;
  for (const auto& [n, peak] : points) {
    if (n < n_min) continue;
    if (!(peak > 0.0) || !(n > 0.0)) throw std::invalid_argument("fit_power_law: nonpositive value");
    lx.push_back(std::log(n));
    ly.push_back(std::log(peak));
    r.n_values.push_back(n);
  }
  if (lx.size() < 3) throw std::invalid_argument("fit_power_law: need at least 3 points with N >= N_min");
  const auto line = fit_line(lx, ly);
  r.exponent = line.slope;
  r.prefactor = std::exp(line.intercept);
  r.residual = line.rms;
  return r;
}

FitResult fit_share(const std::vector<std::pair<double, double>>& points, double n_min) {
  std::vector<double> lx, ly;
  FitResult r;
  for (const auto& [n, share] : points) {
    if (n < n_min) continue;
    if (!(share < 1.0)) throw std::invalid_argument("fit_share: share must be < 1");
    if (!(share > 0.0)) throw std::invalid_argument("fit_share: share must be > 0");
    lx.push_back(std::log(n));
    ly.push_back(std::log1p(-share));
    r.n_values.push_back(n);
  }
  if (lx.size() < 2) throw std::invalid_argument("fit_share: need at least 2 points with N >= N_min");
  const auto line = fit_line(lx, ly);
  r.A = std::exp(line.intercept);
  r.B = -line.slope;
  r.residual = line.rms;
  return r;
}

VectorX photon_shares(const EmissionRecord& record) {
  const VectorX photons = record.photons();
  const double total = photons.sum();
  if (!(total > 0.0)) throw std::invalid_argument("photon_shares: record emits no photons");
  return photons / total;
}

}  // namespace superburst
