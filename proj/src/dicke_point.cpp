#include "superburst/dicke_point.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include <Eigen/Sparse>

namespace superburst {

std::string to_string(PointModel m) {
  switch (m) {
    case PointModel::TwoLevel: return "two-level";
    case PointModel::Lambda: return "lambda";
    case PointModel::Ladder: return "ladder";
  }
  throw std::invalid_argument("unknown point model");
}

PointModel parse_point_model(const std::string& text) {
  if (text == "two-level" || text == "TwoLevel") return PointModel::TwoLevel;
  if (text == "lambda" || text == "Lambda") return PointModel::Lambda;
  if (text == "ladder" || text == "Ladder") return PointModel::Ladder;
  throw std::invalid_argument("unknown point model '" + text + "'");
}

int level_count(PointModel m) { return m == PointModel::TwoLevel ? 2 : 3; }

namespace {

void validate(const PointModelSpec& spec) {
  if (spec.atoms < 1) throw std::invalid_argument("point model: N must be >= 1");
  const std::size_t want = spec.model == PointModel::TwoLevel ? 1 : 2;
  if (spec.rates.size() != want)
    throw std::invalid_argument("point model: " + to_string(spec.model) + " takes " +
                                std::to_string(want) + " rate(s)");
  bool any = false;
  for (double r : spec.rates) {
    if (!(r >= 0.0)) throw std::invalid_argument("point model: rates must be >= 0");
    any = any || r > 0.0;
  }
  if (!any) throw std::invalid_argument("point model: at least one rate must be positive");
}

}  // namespace

std::vector<PointChannel> point_channels(const PointModelSpec& spec) {
  validate(spec);
  switch (spec.model) {
    case PointModel::TwoLevel: return {{"g", 0, 1, spec.rates[0]}};
    case PointModel::Lambda: return {{"g", 0, 1, spec.rates[0]}, {"h", 0, 2, spec.rates[1]}};
    case PointModel::Ladder: return {{"f", 0, 1, spec.rates[0]}, {"g", 1, 2, spec.rates[1]}};
  }
  throw std::invalid_argument("unknown point model");
}

double config_jump_rate(const PointModelSpec& spec, const Occupation& config, std::size_t channel) {
  const auto channels = point_channels(spec);
  if (channel >= channels.size()) throw std::invalid_argument("config_jump_rate: channel not in model");
  if (static_cast<int>(config.size()) != level_count(spec.model))
    throw std::invalid_argument("config_jump_rate: occupation has wrong number of levels");
  const auto& ch = channels[channel];
  return ch.rate * config[static_cast<std::size_t>(ch.upper)] *
         (config[static_cast<std::size_t>(ch.lower)] + 1);
}

ConfigDistribution fully_excited_distribution(const PointModelSpec& spec) {
  validate(spec);
  const int n = spec.atoms;
  const int m = level_count(spec.model);
  const double count = m == 2 ? n + 1.0 : 0.5 * (n + 1.0) * (n + 2.0);
  if (count > 1e7) throw ResourceError("point model: configuration simplex exceeds 1e7 states");
  ConfigDistribution dist;
  if (m == 2) {
    for (int ne = n; ne >= 0; --ne) dist.configs.push_back({ne, n - ne});
  } else {
    for (int n0 = n; n0 >= 0; --n0)
      for (int n1 = n - n0; n1 >= 0; --n1) dist.configs.push_back({n0, n1, n - n0 - n1});
  }
  dist.probs = VectorX::Zero(static_cast<Eigen::Index>(dist.configs.size()));
  dist.probs(0) = 1.0;
  return dist;
}

namespace {

struct Jump {
  Eigen::Index from;
  Eigen::Index to;
  double rate;
  std::size_t channel;
};

}  // namespace

EmissionRecord evolve_point(const PointModelSpec& spec, const VectorX& t_grid,
                            const PointRunOptions& options, ConfigDistribution* final_state) {
  if (t_grid.size() == 0 || t_grid(0) != 0.0) throw std::invalid_argument("evolve_point: t_grid must start at 0");
  const auto channels = point_channels(spec);
  ConfigDistribution dist = fully_excited_distribution(spec);

  std::map<Occupation, Eigen::Index> index;
  for (std::size_t c = 0; c < dist.configs.size(); ++c) index[dist.configs[c]] = static_cast<Eigen::Index>(c);
  std::vector<Jump> jumps;
  VectorX out_rate = VectorX::Zero(dist.probs.size());
  for (std::size_t c = 0; c < dist.configs.size(); ++c) {
    for (std::size_t a = 0; a < channels.size(); ++a) {
      const double w = config_jump_rate(spec, dist.configs[c], a);
      if (w == 0.0) continue;
      Occupation next = dist.configs[c];
      --next[static_cast<std::size_t>(channels[a].upper)];
      ++next[static_cast<std::size_t>(channels[a].lower)];
      jumps.push_back({static_cast<Eigen::Index>(c), index.at(next), w, a});
      out_rate(static_cast<Eigen::Index>(c)) += w;
    }
  }

  auto rhs = [&](double, const VectorX& p, VectorX& dp) {
    dp = -out_rate.cwiseProduct(p);
    for (const auto& j : jumps) dp(j.to) += j.rate * p(j.from);
  };
  std::vector<std::string> keys;
  for (const auto& ch : channels) keys.push_back(ch.key);
  EmissionRecord rec;
  rec.allocate(t_grid, keys);

  DormandPrince<VectorX> solver(rhs, options.tolerances);
  solver.reset(0.0, dist.probs);
  VectorX peak = VectorX::Zero(static_cast<Eigen::Index>(channels.size()));
  double worst = 0.0;
  std::span<const double> times(t_grid.data(), static_cast<std::size_t>(t_grid.size()));
  std::size_t delivered = 0;
  try {
    delivered = integrate_samples(solver, times, [&](std::size_t i, double, const VectorX& p) {
      const auto row = static_cast<Eigen::Index>(i);
      for (const auto& j : jumps) rec.rates(row, static_cast<Eigen::Index>(j.channel)) += j.rate * p(j.from);
      worst = std::max({worst, -p.minCoeff(), p.maxCoeff() - 1.0});
      if (final_state) dist.probs = p;
      if (options.stop_after_peak_fraction > 0.0 && i > 0) {
        peak = peak.cwiseMax(rec.rates.row(row).transpose());
        bool done = true;
        for (Eigen::Index a = 0; a < peak.size(); ++a) {
          const bool rising = rec.rates(row, a) >= rec.rates(row - 1, a);
          if (rising || rec.rates(row, a) > options.stop_after_peak_fraction * peak(a)) done = false;
        }
        if (done) return false;
      }
      return true;
    });
  } catch (const IntegrationFailure& e) {
    rec.partial = true;
    rec.failure = e.what();
    // Rows past the last sampled time hold zeros; drop them.
    Eigen::Index kept = 0;
    while (kept < t_grid.size() && t_grid(kept) <= solver.t()) ++kept;
    delivered = static_cast<std::size_t>(kept);
  }
  rec.truncate(static_cast<Eigen::Index>(delivered));
  rec.positivity_violation = std::max(0.0, worst);
  if (final_state) *final_state = std::move(dist);
  return rec;
}

EmissionRecord symmetric_subspace_oracle(const PointModelSpec& spec, const VectorX& t_grid,
                                         const OdeTolerances& tolerances) {
  const auto channels = point_channels(spec);
  const int n = spec.atoms;
  if (n > 6) throw ResourceError("symmetric_subspace_oracle: N > 6");
  const int m = level_count(spec.model);
  Eigen::Index dim = 1;
  for (int j = 0; j < n; ++j) dim *= m;

  // Basis index = sum_j level_j * m^j; level 0 = e.
  using Sparse = Eigen::SparseMatrix<double>;
  std::vector<Sparse> lower, number;
  for (const auto& ch : channels) {
    std::vector<Eigen::Triplet<double>> trips;
    Eigen::Index stride = 1;
    for (int j = 0; j < n; ++j, stride *= m) {
      for (Eigen::Index s = 0; s < dim; ++s) {
        if ((s / stride) % m == ch.upper)
          trips.emplace_back(s + (ch.lower - ch.upper) * stride, s, 1.0);
      }
    }
    Sparse op(dim, dim);
    op.setFromTriplets(trips.begin(), trips.end());
    lower.push_back(op);
    number.push_back(Sparse(op.transpose() * op));
  }

  auto rhs = [&](double, const VectorX& y, VectorX& dy) {
    Eigen::Map<const MatrixX> rho(y.data(), dim, dim);
    dy.resize(y.size());
    Eigen::Map<MatrixX> drho(dy.data(), dim, dim);
    drho.setZero();
    for (std::size_t a = 0; a < channels.size(); ++a) {
      const double g = channels[a].rate;
      if (g == 0.0) continue;
      const MatrixX srho = lower[a] * rho;
      drho += g * (srho * lower[a].transpose());
      const MatrixX nrho = number[a] * rho;
      drho -= 0.5 * g * (nrho + nrho.transpose());
    }
  };

  std::vector<std::string> keys;
  for (const auto& ch : channels) keys.push_back(ch.key);
  EmissionRecord rec;
  rec.allocate(t_grid, keys);
  VectorX y0 = VectorX::Zero(dim * dim);
  y0(0) = 1.0;
  DormandPrince<VectorX> solver(rhs, tolerances);
  solver.reset(0.0, y0);
  std::span<const double> times(t_grid.data(), static_cast<std::size_t>(t_grid.size()));
  integrate_samples(solver, times, [&](std::size_t i, double, const VectorX& y) {
    Eigen::Map<const MatrixX> rho(y.data(), dim, dim);
    for (std::size_t a = 0; a < channels.size(); ++a) {
      // Tr(S^dag S rho) with S^dag S symmetric.
      double tr = 0.0;
      for (Eigen::Index k = 0; k < number[a].outerSize(); ++k)
        for (Sparse::InnerIterator it(number[a], k); it; ++it) tr += it.value() * rho(it.col(), it.row());
      rec.rates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) = channels[a].rate * tr;
    }
    return true;
  });
  return rec;
}

}  // namespace superburst
