#include "doctest.h"

#include <cfloat>
#include <vector>

#include "superburst/ode.hpp"

using namespace superburst;

TEST_SUITE("ode") {

TEST_CASE("exponential decay to tolerance") {
  DormandPrince<VectorX> s([](double, const VectorX& y, VectorX& dy) { dy = -y; }, {1e-10, 1e-13});
  s.reset(0.0, VectorX::Constant(1, 1.0));
  while (s.t() < 5.0) s.step(5.0);
  CHECK(s.t() == 5.0);
  CHECK(s.y()(0) == doctest::Approx(std::exp(-5.0)).epsilon(1e-8));
}

TEST_CASE("complex rotation and dense output") {
  const double w = 3.0;
  DormandPrince<VectorXc> s([w](double, const VectorXc& y, VectorXc& dy) { dy = complex(0, w) * y; }, {1e-10, 1e-12});
  s.reset(0.0, VectorXc::Constant(1, 1.0));
  const std::vector<double> times = {0.0, 0.1, 0.35, 1.0, 2.5, 4.0};
  std::vector<complex> got;
  const auto n = integrate_samples(s, std::span<const double>(times), [&](std::size_t, double, const VectorXc& y) {
    got.push_back(y(0));
    return true;
  });
  CHECK(n == times.size());
  for (std::size_t i = 0; i < times.size(); ++i) CHECK(std::abs(got[i] - std::polar(1.0, w * times[i])) < 1e-7);
}

TEST_CASE("time-dependent right-hand side") {
  // y' = t^2  ->  y = t^3 / 3.
  DormandPrince<VectorX> s([](double t, const VectorX&, VectorX& dy) { dy = VectorX::Constant(1, t * t); }, {1e-12, 1e-14});
  s.reset(0.0, VectorX::Zero(1));
  while (s.t() < 2.0) s.step(2.0);
  CHECK(s.y()(0) == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("observer can stop early") {
  DormandPrince<VectorX> s([](double, const VectorX& y, VectorX& dy) { dy = -y; }, {});
  s.reset(0.0, VectorX::Ones(2));
  const std::vector<double> times = {0.0, 1.0, 2.0, 3.0};
  const auto n = integrate_samples(s, std::span<const double>(times), [](std::size_t i, double, const VectorX&) { return i < 1; });
  CHECK(n == 2);
}

TEST_CASE("step budget raises IntegrationFailure") {
  OdeTolerances tol{1e-12, 1e-14};
  tol.max_steps = 5;
  DormandPrince<VectorX> s([](double, const VectorX& y, VectorX& dy) { dy = -50.0 * y; }, tol);
  s.reset(0.0, VectorX::Ones(1));
  CHECK_THROWS_AS(
      ([&] {
        while (s.t() < 10.0) s.step(10.0);
      }()),
      IntegrationFailure);
}

TEST_CASE("flush-to-zero guard restores the previous mode") {
  volatile double tiny = DBL_MIN;
  {
    ScopedFlushDenormals guard;
    volatile double r = tiny * 0.25;
#if defined(__SSE2__)
    CHECK(r == 0.0);
#else
    (void)r;
#endif
  }
  volatile double r = tiny * 0.25;
  CHECK(r > 0.0);
}

}
