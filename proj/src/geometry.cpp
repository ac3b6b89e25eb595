#include "superburst/geometry.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace superburst {

ArrayGeometry square_lattice(int n_x, int n_y, double d_nm) {
  if (n_x < 1 || n_y < 1) throw std::invalid_argument("square_lattice: dimensions must be >= 1");
  if (!(d_nm > 0.0)) throw std::invalid_argument("square_lattice: spacing must be positive");
  ArrayGeometry g;
  g.lattice_constant = d_nm;
  g.n_x = n_x;
  g.n_y = n_y;
  g.positions.resize(3, static_cast<Eigen::Index>(n_x) * n_y);
  const double cx = 0.5 * (n_x - 1);
  const double cy = 0.5 * (n_y - 1);
  Eigen::Index k = 0;
  for (int iy = 0; iy < n_y; ++iy) {
    for (int ix = 0; ix < n_x; ++ix, ++k) {
      g.positions.col(k) << (ix - cx) * d_nm, (iy - cy) * d_nm, 0.0;
    }
  }
  return g;
}

ArrayGeometry from_positions(const Positions& positions) {
  if (positions.cols() < 1) throw std::invalid_argument("from_positions: no atoms");
  ArrayGeometry g;
  g.positions = positions;
  g.n_x = static_cast<int>(positions.cols());
  g.n_y = 1;
  return g;
}

Detector detector_direction(double theta, double phi) {
  Detector d;
  d.theta = theta;
  d.phi = phi;
  d.direction << std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta);
  return d;
}

double min_pair_distance(const ArrayGeometry& geometry) {
  double best = std::numeric_limits<double>::infinity();
  const auto& r = geometry.positions;
  for (Eigen::Index j = 0; j < r.cols(); ++j)
    for (Eigen::Index l = j + 1; l < r.cols(); ++l) best = std::min(best, (r.col(j) - r.col(l)).norm());
  return best;
}

}  // namespace superburst
