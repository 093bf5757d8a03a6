#pragma once

#include <Eigen/SVD>

#include "fundeform/fem.hpp"

namespace fundeform {

/// Per-simplex strain form S_T expressing the metric's Lie derivative in the
/// edge frame: for tangent vectors x = E a, y = E b the first-order metric
/// change under the field is a^T S_T b, with S_T = E^T J + J^T E and J the
/// ambient Jacobian. Exactly symmetric and linear in the field.
template <class Mesh>
std::vector<Eigen::Matrix<double, Mesh::simplex_size - 1, Mesh::simplex_size - 1>> strain_form(
    const Mesh& mesh, const MatX3& field) {
  constexpr int k = Mesh::simplex_size;
  auto jac = ambient_jacobian(mesh, field);
  std::vector<Eigen::Matrix<double, k - 1, k - 1>> strain(static_cast<size_t>(mesh.n_simplices()));
  for (size_t s = 0; s < strain.size(); ++s) {
    Eigen::Matrix<double, k - 1, k - 1> half =
        mesh.frame(static_cast<Eigen::Index>(s)).E.transpose() * jac[s];
    strain[s] = half + half.transpose();
  }
  return strain;
}

/// Assembles the symmetric matrix H with f^T H g = -sum_T S_T(grad f, grad g) mu(T),
/// the derivative of the metric-weighted stiffness under the field. Local
/// blocks are -mu(T) B^T S_T B with B = G^{-1} D mapping vertex values to
/// gradient coordinates in the edge frame. H 1 = 0 and rigid fields
/// (translations, infinitesimal rotations) assemble to zero.
template <class Mesh>
SpMat assemble_strain_matrix(const Mesh& mesh, const MatX3& field) {
  constexpr int k = Mesh::simplex_size;
  const auto D = detail::diff_matrix<Mesh>();
  auto strain = strain_form(mesh, field);
  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(mesh.n_simplices()) * k * k);
  const auto& S = mesh.simplices();
  for (Eigen::Index s = 0; s < S.rows(); ++s) {
    const auto& fr = mesh.frame(s);
    Eigen::Matrix<double, k - 1, k> B = fr.Ginv * D;
    Eigen::Matrix<double, k, k> local =
        -fr.measure * B.transpose() * strain[static_cast<size_t>(s)] * B;
    local = (0.5 * (local + local.transpose())).eval();  // exact symmetry
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) trips.emplace_back(S(s, a), S(s, b), local(a, b));
  }
  SpMat H(mesh.n_vertices(), mesh.n_vertices());
  H.setFromTriplets(trips.begin(), trips.end());
  return H;
}

/// Functional representation of a deformation field: the full matrix H plus
/// its expression in a reduced basis, Lambda^+ Phi^T H Phi.
struct DeformationOperator {
  SpMat full;    // n x n, symmetric, rows sum to zero
  MatX reduced;  // k x k
};

template <class Mesh>
DeformationOperator deformation_operator(const Mesh& mesh, const MatX3& field,
                                         const ReducedBasis& basis) {
  DeformationOperator op;
  op.full = assemble_strain_matrix(mesh, field);
  op.reduced = reduce_h1(op.full, basis);
  return op;
}

/// Operator of the outward unit normal field; captures the action of
/// extrinsic curvature on functions. Requires a closed surface.
inline DeformationOperator normal_deformation_operator(const TriMesh& mesh,
                                                       const ReducedBasis& basis) {
  return deformation_operator(mesh, mesh.outward_vertex_normals(), basis);
}

struct CurvatureModes {
  VecX values;     // eigenvalues of the reduced operator, |value| descending
  MatX functions;  // n x m vertex functions
};

/// Largest-magnitude eigenpairs of the reduced normal-field operator,
/// computed from the symmetric pencil (Phi^T H Phi, Lambda) restricted to the
/// non-constant modes. Gradients of the leading functions align with the
/// direction of maximal principal curvature.
inline CurvatureModes curvature_eigenfunctions(const SpMat& H_normal, const ReducedBasis& basis,
                                               Eigen::Index m) {
  MatX K = basis.phi.transpose() * (H_normal * basis.phi);
  VecX pinv = basis.lambda_pinv();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < pinv.size(); ++i)
    if (pinv[i] > 0) keep.push_back(i);
  const Eigen::Index r = static_cast<Eigen::Index>(keep.size());
  if (m < 1 || m > r) throw Error("curvature_eigenfunctions: m out of range");
  MatX Kr(r, r);
  VecX inv_sqrt(r);
  for (Eigen::Index a = 0; a < r; ++a) {
    inv_sqrt[a] = std::sqrt(pinv[keep[static_cast<size_t>(a)]]);
    for (Eigen::Index b = 0; b < r; ++b)
      Kr(a, b) = K(keep[static_cast<size_t>(a)], keep[static_cast<size_t>(b)]);
  }
  MatX Bsym = inv_sqrt.asDiagonal() * Kr * inv_sqrt.asDiagonal();
  Bsym = 0.5 * (Bsym + Bsym.transpose());
  Eigen::SelfAdjointEigenSolver<MatX> solver(Bsym);
  if (solver.info() != Eigen::Success)
    throw ConvergenceFailure("curvature_eigenfunctions: solver failed");

  std::vector<Eigen::Index> order(static_cast<size_t>(r));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(solver.eigenvalues()[a]) > std::abs(solver.eigenvalues()[b]);
  });

  CurvatureModes modes;
  modes.values.resize(m);
  MatX coeffs = MatX::Zero(basis.k(), m);
  for (Eigen::Index j = 0; j < m; ++j) {
    Eigen::Index src = order[static_cast<size_t>(j)];
    modes.values[j] = solver.eigenvalues()[src];
    VecX x = inv_sqrt.asDiagonal() * solver.eigenvectors().col(src);
    for (Eigen::Index a = 0; a < r; ++a) coeffs(keep[static_cast<size_t>(a)], j) = x[a];
  }
  detail::fix_signs(coeffs);
  modes.functions = basis.phi * coeffs;
  return modes;
}

// ---------------------------------------------------------------------------
// Recovery map: field coefficients -> vec(reduced operator).

inline VecX vec(const MatX& m) { return Eigen::Map<const VecX>(m.data(), m.size()); }

/// Columns are vec of the reduced operators of the given fields.
template <class Mesh>
MatX recovery_matrix(const Mesh& mesh, const std::vector<MatX3>& fields,
                     const ReducedBasis& basis) {
  const Eigen::Index k = basis.k();
  MatX M(k * k, static_cast<Eigen::Index>(fields.size()));
  for (size_t i = 0; i < fields.size(); ++i) {
    SpMat H = assemble_strain_matrix(mesh, fields[i]);
    M.col(static_cast<Eigen::Index>(i)) = vec(reduce_h1(H, basis));
  }
  return M;
}

/// Recovery map over the full per-vertex basis (3n columns): column (3v+axis)
/// is the reduced operator of the unit displacement of vertex v along axis.
template <class Mesh>
MatX full_vertex_recovery_matrix(const Mesh& mesh, const ReducedBasis& basis) {
  const Eigen::Index n = mesh.n_vertices();
  const Eigen::Index k = basis.k();
  MatX M(k * k, 3 * n);
  MatX3 field = MatX3::Zero(n, 3);
  for (Eigen::Index v = 0; v < n; ++v)
    for (int axis = 0; axis < 3; ++axis) {
      field(v, axis) = 1.0;
      SpMat H = assemble_strain_matrix(mesh, field);
      M.col(3 * v + axis) = vec(reduce_h1(H, basis));
      field(v, axis) = 0.0;
    }
  return M;
}

inline VecX singular_values(const MatX& M) {
  Eigen::BDCSVD<MatX> svd(M);
  return svd.singularValues();
}

// ---------------------------------------------------------------------------
// Rigid motions: the kernel of the field -> operator map.

/// 3n x 6 basis of infinitesimal rigid fields (three translations, three
/// rotations about the vertex centroid), orthonormalized.
inline MatX rigid_field_basis(const MatX3& V) {
  const Eigen::Index n = V.rows();
  Vec3 centroid = V.colwise().mean();
  MatX basis = MatX::Zero(3 * n, 6);
  for (Eigen::Index v = 0; v < n; ++v) {
    for (int a = 0; a < 3; ++a) basis(3 * v + a, a) = 1.0;
    Vec3 p = V.row(v).transpose() - centroid;
    basis.block<3, 1>(3 * v, 3) = Vec3::UnitX().cross(p);
    basis.block<3, 1>(3 * v, 4) = Vec3::UnitY().cross(p);
    basis.block<3, 1>(3 * v, 5) = Vec3::UnitZ().cross(p);
  }
  Eigen::HouseholderQR<MatX> qr(basis);
  return qr.householderQ() * MatX::Identity(3 * n, 6);
}

/// Removes the best rigid-field approximation from a vertex field.
inline MatX3 project_out_rigid(const MatX3& field, const MatX3& V) {
  MatX Q = rigid_field_basis(V);
  VecX flat = flatten_field(field);
  flat -= Q * (Q.transpose() * flat);
  return unflatten_field(flat);
}

}  // namespace fundeform
