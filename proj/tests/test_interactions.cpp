#include "doctest.h"

#include <random>
#include <sstream>

#include "oracles/dyadic.hpp"
#include "superburst/interactions.hpp"

using namespace superburst;

namespace {

Vector3c random_polarization(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vector3c d;
  for (int i = 0; i < 3; ++i) d(i) = complex(g(rng), g(rng));
  return d.normalized();
}

DecayChannel channel_with(const Vector3c& d, double wavelength = 1000.0) {
  DecayChannel ch;
  ch.key = "x";
  ch.rate = 1.0;
  ch.wavenumber = 2.0 * kPi / wavelength;
  ch.polarization = d;
  return ch;
}

}  // namespace

TEST_SUITE("interactions") {

TEST_CASE("pair kernel matches the complex dyadic Green tensor") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> dist(0.02, 3.0);  // in wavelengths
  std::vector<Vector3c> pols = {Vector3c::UnitZ(), Vector3c::UnitX(), spherical_unit(1), spherical_unit(-1),
                                Vector3c(0, std::sqrt(0.5), complex(0, std::sqrt(0.5)))};
  for (int i = 0; i < 20; ++i) pols.push_back(random_polarization(rng));
  int checked = 0;
  for (const auto& d : pols) {
    const auto ch = channel_with(d);
    for (int i = 0; i < 20; ++i) {
      Vector3 r(g(rng), g(rng), g(rng));
      r *= dist(rng) * 1000.0 / r.norm();
      const auto lib = greens_coupling(r, ch);
      const double k = ch.wavenumber;
      // Reciprocity and the reality of both parts for any complex dipole.
      CHECK(std::abs(oracle::coupling(r, k, d) - oracle::coupling(-r, k, d)) < 1e-12);
      CHECK(lib.dissipative == doctest::Approx(oracle::gamma(r, k, d)).epsilon(1e-9).scale(1.0));
      CHECK(lib.coherent == doctest::Approx(oracle::coherent(r, k, d)).epsilon(1e-9).scale(1.0));
      ++checked;
    }
  }
  CHECK(checked == 500);
}

TEST_CASE("series branch of the kernel joins the closed form") {
  for (double p : {0.0, 0.3, 1.0}) {
    const auto below = dipole_kernel(0.1 - 1e-12, p);
    const auto above = dipole_kernel(0.1 + 1e-12, p);
    CHECK(below.dissipative == doctest::Approx(above.dissipative).epsilon(1e-10));
    CHECK(below.coherent == doctest::Approx(above.coherent).epsilon(1e-10));
  }
  // Small-u values against long double closed form.
  for (long double u : {0.003L, 0.03L, 0.09L}) {
    const long double h = std::cos(u) / (u * u) - std::sin(u) / (u * u * u);
    const auto k = dipole_kernel(static_cast<double>(u), 0.0);
    CHECK(k.dissipative == doctest::Approx(static_cast<double>(1.5L * (std::sin(u) / u + h))).epsilon(1e-12));
  }
}

TEST_CASE("point limit: Gamma_jl -> Gamma0 at u = 1e-3") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const double p = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    CHECK(std::abs(dipole_kernel(1e-3, p).dissipative - 1.0) < 1e-6);
  }
}

TEST_CASE("coupling matrices: diagonal, symmetry, trace and Frobenius identities") {
  for (auto st : {InitialState::D1_m0, InitialState::D3_m0, InitialState::D3_m3}) {
    const auto scheme = build_level_scheme(Species::Yb174, st);
    const auto geo = square_lattice(5, 4, 0.17 * scheme.reference_wavelength_nm());
    const auto c = coupling_matrices(geo, scheme);
    REQUIRE(c.size() == 20);
    double rates = 0.0;
    for (const auto& ch : c.channels) {
      rates += ch.rate;
      CHECK((ch.gamma - ch.gamma.transpose()).norm() == 0.0);
      CHECK((ch.coherent - ch.coherent.transpose()).norm() == 0.0);
      CHECK(ch.coherent.diagonal().norm() == 0.0);
      CHECK((ch.gamma.diagonal().array() - ch.rate).abs().maxCoeff() == 0.0);
      REQUIRE(ch.has_spectrum());
      CHECK(std::abs(ch.spectrum.sum() - 20 * ch.rate) < 1e-8);
      CHECK(std::abs(ch.spectrum.squaredNorm() - spectrum_square_sum(ch)) < 1e-8);
      for (Eigen::Index i = 1; i < ch.spectrum.size(); ++i) CHECK(ch.spectrum(i) <= ch.spectrum(i - 1));
      const MatrixX rebuilt = ch.modes * ch.spectrum.asDiagonal() * ch.modes.transpose();
      CHECK((rebuilt - ch.gamma).norm() < 1e-10);
    }
    CHECK(rates == doctest::Approx(1.0));
  }
}

TEST_CASE("uncorrelated channel has a diagonal Gamma and no J") {
  LevelSchemeOptions opts;
  opts.include_weak_line = true;
  const auto scheme = build_level_scheme(Species::Yb174, InitialState::D1_m0, opts);
  const auto c = coupling_matrices(square_lattice(3, 3, 200.0), scheme);
  const auto& loss = c.channels.back();
  CHECK_FALSE(loss.correlated);
  CHECK((loss.gamma - MatrixX(loss.gamma.diagonal().asDiagonal())).norm() == 0.0);
  CHECK(loss.coherent.norm() == 0.0);
}

TEST_CASE("coincident atoms are rejected") {
  Positions p(3, 2);
  p.col(0) = Vector3::Zero();
  p.col(1) = Vector3::Zero();
  const auto scheme = two_level_scheme(1000.0, Vector3c::UnitZ());
  CHECK_THROWS_AS(coupling_matrices(from_positions(p), scheme), std::domain_error);
  CHECK_THROWS_AS(greens_coupling(Vector3::Zero(), scheme.channels[0]), std::domain_error);
}

TEST_CASE("only_channel builds a single channel") {
  const auto scheme = build_level_scheme(Species::Sr88, InitialState::D1_m0);
  CouplingOptions opts;
  opts.only_channel = 1;
  opts.with_spectrum = false;
  const auto c = coupling_matrices(square_lattice(2, 2, 500.0), scheme, opts);
  CHECK(c.channels[0].gamma.size() == 0);
  CHECK(c.channels[1].gamma.rows() == 4);
  CHECK_FALSE(c.channels[1].has_spectrum());
  CHECK(c.size() == 4);
  CHECK(c.channels[0].rate == doctest::Approx(2.8 / 4.6));
}

TEST_CASE("directional weights are Hermitian unit-modulus phases") {
  const auto geo = square_lattice(3, 2, 310.0);
  const auto w = directional_weights(geo, 2 * kPi / 1389.0, detector_direction(0.7, 0.3).direction);
  CHECK((w - w.adjoint()).norm() < 1e-14);
  CHECK((w.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-14);
  const double phase = 2 * kPi / 1389.0 * detector_direction(0.7, 0.3).direction.dot(geo.positions.col(0) - geo.positions.col(4));
  CHECK(std::abs(w(0, 4) - std::polar(1.0, phase)) < 1e-12);
}

TEST_CASE("coupling dump has one block per channel") {
  const auto c = coupling_matrices(square_lattice(2, 1, 300.0), build_level_scheme(Species::Yb174, InitialState::D1_m0));
  std::ostringstream os;
  write_coupling_csv(os, c);
  const std::string s = os.str();
  CHECK(s.find("channel,f,") != std::string::npos);
  CHECK(s.find("channel,h,") != std::string::npos);
}

}
