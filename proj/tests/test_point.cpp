#include "doctest.h"

#include <algorithm>
#include <functional>

#include "superburst/dicke_point.hpp"

using namespace superburst;

namespace {

// Normalized symmetric state with the given occupations as an explicit m^N vector
// (atom 0 is the most significant digit).
VectorX symmetric_state(const Occupation& occ) {
  const int m = static_cast<int>(occ.size());
  int n = 0;
  for (int k : occ) n += k;
  Eigen::Index dim = 1;
  for (int j = 0; j < n; ++j) dim *= m;
  VectorX psi = VectorX::Zero(dim);
  for (Eigen::Index idx = 0; idx < dim; ++idx) {
    Occupation count(static_cast<std::size_t>(m), 0);
    for (Eigen::Index r = idx, j = 0; j < n; ++j, r /= m) ++count[static_cast<std::size_t>(r % m)];
    if (count == occ) psi(idx) = 1.0;
  }
  return psi.normalized();
}

// Sum_j |lower><upper|_j applied to a product-space vector.
VectorX collective_lower(const VectorX& psi, int m, int n, int upper, int lower) {
  VectorX out = VectorX::Zero(psi.size());
  for (Eigen::Index idx = 0; idx < psi.size(); ++idx) {
    if (psi(idx) == 0.0) continue;
    Eigen::Index place = 1;
    for (int j = 0; j < n; ++j, place *= m) {
      const Eigen::Index digit = (idx / place) % m;
      if (digit != upper) continue;
      out(idx + (lower - upper) * place) += psi(idx);
    }
  }
  return out;
}

EmissionRecord run(PointModel model, int n, std::vector<double> rates, double t_max, int samples) {
  PointModelSpec spec{model, n, std::move(rates)};
  return evolve_point(spec, VectorX::LinSpaced(samples, 0.0, t_max));
}

}  // namespace

TEST_SUITE("point") {

TEST_CASE("jump rates equal the squared norm of the collective operator on symmetric states") {
  for (auto model : {PointModel::TwoLevel, PointModel::Lambda, PointModel::Ladder}) {
    for (int n = 1; n <= 5; ++n) {
      PointModelSpec spec{model, n, model == PointModel::TwoLevel ? std::vector<double>{1.3}
                                                                  : std::vector<double>{1.3, 0.7}};
      const auto channels = point_channels(spec);
      const int m = level_count(model);
      const auto dist = fully_excited_distribution(spec);
      for (const auto& occ : dist.configs) {
        const VectorX psi = symmetric_state(occ);
        for (std::size_t c = 0; c < channels.size(); ++c) {
          const VectorX out = collective_lower(psi, m, n, channels[c].upper, channels[c].lower);
          CHECK(config_jump_rate(spec, occ, c) ==
                doctest::Approx(channels[c].rate * out.squaredNorm()).epsilon(1e-12).scale(1.0));
        }
      }
    }
  }
}

TEST_CASE("configuration simplex enumeration") {
  PointModelSpec spec{PointModel::Lambda, 4, {1.0, 1.0}};
  const auto dist = fully_excited_distribution(spec);
  CHECK(dist.configs.size() == 15);
  CHECK(dist.configs.front() == Occupation{4, 0, 0});
  CHECK(dist.probs(0) == 1.0);
  CHECK(dist.probs.sum() == 1.0);
  PointModelSpec two{PointModel::TwoLevel, 7, {1.0}};
  CHECK(fully_excited_distribution(two).configs.size() == 8);
  PointModelSpec huge{PointModel::Lambda, 10000, {1.0, 1.0}};
  CHECK_THROWS_AS(fully_excited_distribution(huge), ResourceError);
  PointModelSpec wrong{PointModel::Ladder, 3, {1.0}};
  CHECK_THROWS_AS(point_channels(wrong), std::invalid_argument);
  CHECK(parse_point_model(to_string(PointModel::Ladder)) == PointModel::Ladder);
  CHECK_THROWS_AS(parse_point_model("vee"), std::invalid_argument);
}

TEST_CASE("simplex reduction agrees with the full Lindblad evolution") {
  const VectorX t = VectorX::LinSpaced(41, 0.0, 4.0);
  for (auto model : {PointModel::TwoLevel, PointModel::Lambda, PointModel::Ladder}) {
    for (int n = 1; n <= 4; ++n) {
      PointModelSpec spec{model, n, model == PointModel::TwoLevel ? std::vector<double>{1.0}
                                                                  : std::vector<double>{0.6, 0.4}};
      PointRunOptions opts;
      opts.tolerances = {1e-10, 1e-13};
      const auto fast = evolve_point(spec, t, opts);
      const auto full = symmetric_subspace_oracle(spec, t);
      REQUIRE(fast.rates.cols() == full.rates.cols());
      CHECK(fast.channels == full.channels);
      INFO(to_string(model), " N=", n);
      CHECK((fast.rates - full.rates).cwiseAbs().maxCoeff() < 1e-7 * std::max(1.0, full.rates.maxCoeff()));
    }
  }
}

TEST_CASE("initial rates are N Gamma on the channels leaving the excited level") {
  const auto lam = run(PointModel::Lambda, 37, {0.6, 0.4}, 0.1, 3);
  CHECK(lam.rates(0, 0) == 37 * 0.6);
  CHECK(lam.rates(0, 1) == 37 * 0.4);
  const auto lad = run(PointModel::Ladder, 12, {1.0, 2.0}, 0.1, 3);
  CHECK(lad.rates(0, 0) == 12.0);
  CHECK(lad.rates(0, 1) == 0.0);
  const auto two = run(PointModel::TwoLevel, 9, {1.0}, 0.1, 3);
  CHECK(two.rates(0, 0) == 9.0);
}

TEST_CASE("photon number is conserved") {
  const auto two = run(PointModel::TwoLevel, 20, {1.0}, 25.0, 10001);
  CHECK(two.photons().sum() == doctest::Approx(20.0).epsilon(1e-3 / 20.0));
  const auto lam = run(PointModel::Lambda, 30, {2.0 / 3.0, 1.0 / 3.0}, 25.0, 10001);
  CHECK(lam.photons().sum() == doctest::Approx(30.0).epsilon(1e-3 / 30.0));
  const auto lad = run(PointModel::Ladder, 15, {1.0, 0.5}, 60.0, 20001);
  CHECK(lad.photons().sum() == doctest::Approx(30.0).epsilon(1e-3 / 30.0));
  // Every excitation passes through both ladder steps.
  CHECK(lad.photons()(0) == doctest::Approx(15.0).epsilon(1e-4));
  CHECK(lad.photons()(1) == doctest::Approx(15.0).epsilon(1e-4));
}

TEST_CASE("two-level Dicke peak stays below the mean-field N^2 / 4") {
  // Quantum fluctuations of the initial delay lower the averaged peak to about 0.2 N^2.
  for (int n : {50, 100, 200}) {
    const auto r = run(PointModel::TwoLevel, n, {1.0}, 1.0, 2001);
    const double peak = r.rates.col(0).maxCoeff();
    CHECK(peak > 0.15 * n * n);
    CHECK(peak < 0.25 * n * (n + 2));
  }
}

TEST_CASE("early stop keeps the peak") {
  PointModelSpec spec{PointModel::Lambda, 40, {0.6, 0.4}};
  const VectorX t = VectorX::LinSpaced(2001, 0.0, 2.0);
  PointRunOptions opts;
  const auto full = evolve_point(spec, t, opts);
  opts.stop_after_peak_fraction = 0.05;
  const auto cut = evolve_point(spec, t, opts);
  CHECK(cut.samples() < full.samples());
  CHECK(cut.rates.col(0).maxCoeff() == doctest::Approx(full.rates.col(0).maxCoeff()).epsilon(1e-9));
}

}
