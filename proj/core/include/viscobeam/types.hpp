#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace viscobeam {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Thrown when an input violates a documented precondition (bad knot
/// vector, parameter outside the knot range, non-skew matrix, ...).
class ContractError : public std::invalid_argument {
 public:
  explicit ContractError(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when the geometry degenerates (vanishing tangent, collinear
/// circle samples, mismatched joint positions, ...).
class GeometryError : public std::runtime_error {
 public:
  explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace viscobeam
