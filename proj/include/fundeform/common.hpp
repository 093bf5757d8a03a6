#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fundeform {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using VecX = Eigen::VectorXd;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;
using MatX = Eigen::MatrixXd;
using MatX3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using MatX3i = Eigen::Matrix<int, Eigen::Dynamic, 3>;
using MatX4i = Eigen::Matrix<int, Eigen::Dynamic, 4>;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Base class for every error thrown by the library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : Error {
  using Error::Error;
};
struct DegenerateSimplex : Error {
  using Error::Error;
};
struct NonManifold : Error {
  using Error::Error;
};
struct ZeroNormal : Error {
  using Error::Error;
};
struct ConnectivityMismatch : Error {
  using Error::Error;
};
struct SingularMap : Error {
  using Error::Error;
};
struct ConvergenceFailure : Error {
  using Error::Error;
};
struct Infeasible : Error {
  using Error::Error;
};
struct IndexError : Error {
  using Error::Error;
};
struct DegenerateStep : Error {
  using Error::Error;
};

inline VecX flatten(const MatX& m) {
  return Eigen::Map<const VecX>(m.data(), m.size());
}

/// Flattens a per-vertex 3-vector field into the (x0,y0,z0,x1,...) layout
/// used by the vector-valued quadratic forms.
inline VecX flatten_field(const MatX3& field) {
  VecX v(field.rows() * 3);
  for (Eigen::Index i = 0; i < field.rows(); ++i) v.segment<3>(3 * i) = field.row(i).transpose();
  return v;
}

inline MatX3 unflatten_field(const VecX& v) {
  MatX3 field(v.size() / 3, 3);
  for (Eigen::Index i = 0; i < field.rows(); ++i) field.row(i) = v.segment<3>(3 * i).transpose();
  return field;
}

}  // namespace fundeform
