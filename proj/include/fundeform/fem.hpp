#pragma once

#include <Eigen/Eigenvalues>

#include "fundeform/mesh.hpp"

namespace fundeform {

/// Diagonal of the lumped mass matrix: each simplex distributes its measure
/// equally to its vertices.
template <class Mesh>
VecX lumped_mass(const Mesh& mesh) {
  VecX mass = VecX::Zero(mesh.n_vertices());
  const auto& S = mesh.simplices();
  const double share = 1.0 / Mesh::simplex_size;
  for (Eigen::Index s = 0; s < S.rows(); ++s)
    for (int c = 0; c < Mesh::simplex_size; ++c) mass[S(s, c)] += share * mesh.frame(s).measure;
  return mass;
}

namespace detail {
template <class Mesh>
auto diff_matrix() {
  if constexpr (Mesh::simplex_size == 3)
    return tri_diff();
  else
    return tet_diff();
}
}  // namespace detail

/// Stiffness matrix W discretizing the Dirichlet inner product,
/// f^T W g = sum_T <grad f, grad g>_T mu(T). Assembled from the local blocks
/// mu(T) D^T G^{-1} D, which reproduces the cotangent weights on triangles
/// and the standard P1 stiffness on tets. Symmetric PSD, rows sum to zero.
template <class Mesh>
SpMat stiffness(const Mesh& mesh) {
  constexpr int k = Mesh::simplex_size;
  const auto D = detail::diff_matrix<Mesh>();
  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(mesh.n_simplices()) * k * k);
  const auto& S = mesh.simplices();
  for (Eigen::Index s = 0; s < S.rows(); ++s) {
    const auto& fr = mesh.frame(s);
    Eigen::Matrix<double, k, k> local = fr.measure * D.transpose() * fr.Ginv * D;
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) trips.emplace_back(S(s, a), S(s, b), local(a, b));
  }
  SpMat W(mesh.n_vertices(), mesh.n_vertices());
  W.setFromTriplets(trips.begin(), trips.end());
  return W;
}

/// Piecewise-constant P1 gradient of a vertex function, one 3-vector per face.
inline MatX3 grad(const TriMesh& mesh, const VecX& f) {
  if (f.size() != mesh.n_vertices()) throw Error("grad: function size mismatch");
  MatX3 g(mesh.n_simplices(), 3);
  const auto& F = mesh.simplices();
  for (Eigen::Index s = 0; s < F.rows(); ++s) {
    const FaceFrame& fr = mesh.frame(s);
    Vec2 df(f[F(s, 0)] - f[F(s, 1)], f[F(s, 1)] - f[F(s, 2)]);
    g.row(s) = (fr.E * (fr.Ginv * df)).transpose();
  }
  return g;
}

/// Ambient finite-difference Jacobian of an extrinsic field per simplex:
/// columns are the field differences along the frame's edge directions.
template <class Mesh>
std::vector<Eigen::Matrix<double, 3, Mesh::simplex_size - 1>> ambient_jacobian(const Mesh& mesh,
                                                                               const MatX3& field) {
  check_field(mesh, field);
  constexpr int k = Mesh::simplex_size;
  std::vector<Eigen::Matrix<double, 3, k - 1>> jac(static_cast<size_t>(mesh.n_simplices()));
  const auto& S = mesh.simplices();
  for (Eigen::Index s = 0; s < S.rows(); ++s)
    for (int c = 0; c + 1 < k; ++c)
      jac[static_cast<size_t>(s)].col(c) =
          (field.row(S(s, c)) - field.row(S(s, c + 1))).transpose();
  return jac;
}

/// Tangential divergence per simplex, Tr(G^{-1} E^T (ambient Jacobian)).
template <class Mesh>
VecX divergence(const Mesh& mesh, const MatX3& field) {
  auto jac = ambient_jacobian(mesh, field);
  VecX div(mesh.n_simplices());
  for (Eigen::Index s = 0; s < mesh.n_simplices(); ++s) {
    const auto& fr = mesh.frame(s);
    div[s] = (fr.Ginv * (fr.E.transpose() * jac[static_cast<size_t>(s)])).trace();
  }
  return div;
}

/// Mass-orthonormal Laplace-Beltrami eigenbasis: W phi = A phi lambda with
/// eigenvalues ascending and phi^T A phi = I. Eigenvector signs are fixed so
/// the first coefficient above a relative threshold is positive, making
/// reduced operators reproducible across runs.
struct ReducedBasis {
  VecX lambda;  // ascending, lambda[0] = 0 on a connected mesh
  MatX phi;     // n x k

  Eigen::Index k() const { return lambda.size(); }
  Eigen::Index n() const { return phi.rows(); }

  /// Pseudo-inverse of the eigenvalue diagonal; entries within roundoff of
  /// zero (the constants) invert to zero.
  VecX lambda_pinv() const {
    double lmax = lambda.size() ? lambda.maxCoeff() : 0.0;
    VecX inv = VecX::Zero(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
      if (lambda[i] > 1e-12 * std::max(lmax, 1.0)) inv[i] = 1.0 / lambda[i];
    return inv;
  }
};

namespace detail {
inline void fix_signs(MatX& phi) {
  for (Eigen::Index j = 0; j < phi.cols(); ++j) {
    double scale = phi.col(j).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < phi.rows(); ++i) {
      if (std::abs(phi(i, j)) > 1e-12 * scale) {
        if (phi(i, j) < 0) phi.col(j) = -phi.col(j);
        break;
      }
    }
  }
}
}  // namespace detail

/// Smallest-k generalized eigenpairs of (W, diag(mass)). Dense solve; fine at
/// desk scale (n up to a few thousand).
inline ReducedBasis eigenbasis(const SpMat& W, const VecX& mass, Eigen::Index k) {
  const Eigen::Index n = W.rows();
  if (k < 1 || k > n) throw Error("eigenbasis: k out of range");
  if ((mass.array() <= 0).any()) throw Error("eigenbasis: mass must be positive");
  VecX inv_sqrt = mass.array().rsqrt();
  MatX B = MatX(W);
  B = inv_sqrt.asDiagonal() * B * inv_sqrt.asDiagonal();
  B = 0.5 * (B + B.transpose());
  Eigen::SelfAdjointEigenSolver<MatX> solver(B);
  if (solver.info() != Eigen::Success) throw ConvergenceFailure("eigenbasis: dense solver failed");
  ReducedBasis basis;
  basis.lambda = solver.eigenvalues().head(k);
  double lmax = solver.eigenvalues().cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < k; ++i)
    if (std::abs(basis.lambda[i]) < 1e-10 * std::max(lmax, 1.0)) basis.lambda[i] = 0.0;
  basis.phi = inv_sqrt.asDiagonal() * solver.eigenvectors().leftCols(k);
  detail::fix_signs(basis.phi);
  return basis;
}

template <class Mesh>
ReducedBasis eigenbasis(const Mesh& mesh, Eigen::Index k) {
  if (!mesh.connected()) throw Error("eigenbasis: mesh must be connected");
  return eigenbasis(stiffness(mesh), lumped_mass(mesh), k);
}

/// Reduced matrix of an operator O acting on functions, given the matrix P
/// with f^T P g = <f, O g> in the H^1 pairing: Lambda^+ Phi^T P Phi.
inline MatX reduce_h1(const SpMat& P, const ReducedBasis& basis) {
  MatX R = basis.phi.transpose() * (P * basis.phi);
  return basis.lambda_pinv().asDiagonal() * R;
}

/// Reduced matrix in the L^2 pairing (mass-orthonormal basis): Phi^T P Phi.
inline MatX reduce_l2(const SpMat& P, const ReducedBasis& basis) {
  return basis.phi.transpose() * (P * basis.phi);
}

}  // namespace fundeform
