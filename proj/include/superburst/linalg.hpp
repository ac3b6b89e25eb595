#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace superburst {

using complex = std::complex<double>;

using Vector3 = Eigen::Vector3d;
using Vector3c = Eigen::Vector3cd;
using Positions = Eigen::Matrix3Xd;

using VectorX = Eigen::VectorXd;
using VectorXc = Eigen::VectorXcd;
using MatrixX = Eigen::MatrixXd;
using MatrixXc = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr complex kI{0.0, 1.0};

/// Thrown when a request would exceed the memory or dimension limits of a solver.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when an adaptive integration cannot proceed (step-size underflow, step budget).
class IntegrationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace superburst
