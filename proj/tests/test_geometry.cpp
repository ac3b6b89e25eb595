#include "doctest.h"

#include "superburst/geometry.hpp"

using namespace superburst;

TEST_SUITE("geometry") {

TEST_CASE("square lattice is centered in the z = 0 plane") {
  const auto g = square_lattice(3, 4, 250.0);
  CHECK(g.size() == 12);
  CHECK(g.positions.rowwise().mean().norm() < 1e-12);
  CHECK(g.positions.row(2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(min_pair_distance(g) == doctest::Approx(250.0));
  CHECK(g.positions(0, 1) - g.positions(0, 0) == doctest::Approx(250.0));
  CHECK_THROWS_AS(square_lattice(0, 3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(square_lattice(3, 3, 0.0), std::invalid_argument);
}

TEST_CASE("single atom has no pair distance") {
  CHECK(std::isinf(min_pair_distance(square_lattice(1, 1, 100.0))));
}

TEST_CASE("detector direction") {
  const auto x = detector_direction(kPi / 2, 0.0);
  CHECK((x.direction - Vector3::UnitX()).norm() < 1e-15);
  const auto d = detector_direction(kPi / 4, kPi / 4);
  CHECK(d.direction.norm() == doctest::Approx(1.0));
  CHECK(d.direction(2) == doctest::Approx(std::sqrt(0.5)));
}

}
