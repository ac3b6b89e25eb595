#pragma once

#include "superburst/linalg.hpp"

namespace superburst {

struct ArrayGeometry {
  Positions positions;  // 3 x N, nm
  double lattice_constant = 0.0;  // nm
  int n_x = 0;
  int n_y = 0;

  int size() const { return static_cast<int>(positions.cols()); }
};

/// n_x x n_y square grid of spacing d_nm in the z = 0 plane, centered at the origin.
ArrayGeometry square_lattice(int n_x, int n_y, double d_nm);

/// Arbitrary positions (used for the point-limit and randomized checks).
ArrayGeometry from_positions(const Positions& positions);

struct Detector {
  double theta = 0.0;
  double phi = 0.0;
  Vector3 direction = Vector3::UnitZ();
};

/// Unit vector (sin t cos p, sin t sin p, cos t).
Detector detector_direction(double theta, double phi);

/// Smallest pairwise distance; +inf for a single atom.
double min_pair_distance(const ArrayGeometry& geometry);

}  // namespace superburst
