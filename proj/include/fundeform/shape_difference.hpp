#pragma once

#include <Eigen/SVD>

#include "fundeform/deformation.hpp"

namespace fundeform {

enum class ShapeDiffKind { Area, Conformal, Unified };

inline ShapeDiffKind shape_diff_kind_from_string(const std::string& s) {
  if (s == "area") return ShapeDiffKind::Area;
  if (s == "conformal") return ShapeDiffKind::Conformal;
  if (s == "unified") return ShapeDiffKind::Unified;
  throw Error("unknown shape difference kind '" + s + "'");
}

template <class Mesh>
void check_same_connectivity(const Mesh& a, const Mesh& b) {
  if (a.n_vertices() != b.n_vertices() || a.n_simplices() != b.n_simplices() ||
      a.simplices() != b.simplices())
    throw ConnectivityMismatch("meshes do not share connectivity");
}

/// Modified stiffness W^M_N: the stiffness of N with each local block scaled
/// by the simplex measure ratio mu^M(T)/mu^N(T), i.e. gradients and angles
/// from N integrated against the measure of M. Equals W_N when every ratio
/// is one.
template <class Mesh>
SpMat modified_stiffness(const Mesh& M, const Mesh& N) {
  check_same_connectivity(M, N);
  constexpr int k = Mesh::simplex_size;
  const auto D = detail::diff_matrix<Mesh>();
  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(N.n_simplices()) * k * k);
  const auto& S = N.simplices();
  for (Eigen::Index s = 0; s < S.rows(); ++s) {
    const auto& fr = N.frame(s);
    Eigen::Matrix<double, k, k> local = M.frame(s).measure * D.transpose() * fr.Ginv * D;
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) trips.emplace_back(S(s, a), S(s, b), local(a, b));
  }
  SpMat W(N.n_vertices(), N.n_vertices());
  W.setFromTriplets(trips.begin(), trips.end());
  return W;
}

namespace detail {
// Shape differences act as identity on constants; the H^1 reduction leaves
// the constant row empty, so it is patched explicitly.
inline void patch_constant_row(MatX& reduced, const ReducedBasis& basis) {
  if (basis.lambda.size() > 0 && basis.lambda_pinv()[0] == 0.0) reduced(0, 0) = 1.0;
}
}  // namespace detail

/// Reduced shape difference between same-connectivity meshes, expressed in
/// the basis of M. Identity iff the map is area-preserving / conformal /
/// isometric for the respective kind.
template <class Mesh>
MatX shape_difference_same_conn(const Mesh& M, const Mesh& N, const ReducedBasis& basis,
                                ShapeDiffKind kind) {
  check_same_connectivity(M, N);
  switch (kind) {
    case ShapeDiffKind::Area: {
      VecX mass_n = lumped_mass(N);
      return basis.phi.transpose() * mass_n.asDiagonal() * basis.phi;
    }
    case ShapeDiffKind::Conformal: {
      MatX R = reduce_h1(stiffness(N), basis);
      detail::patch_constant_row(R, basis);
      return R;
    }
    case ShapeDiffKind::Unified: {
      MatX R = reduce_h1(modified_stiffness(M, N), basis);
      detail::patch_constant_row(R, basis);
      return R;
    }
  }
  throw Error("unreachable");
}

/// Shape difference from a functional map C (coefficients on M to
/// coefficients on N). Unified: Lambda_M^+ C^{-1} Lambda_N C; area: C^T C;
/// conformal: Lambda_M^+ C^T Lambda_N C.
inline MatX shape_difference_fmap(const ReducedBasis& basisM, const VecX& lambdaN, const MatX& C,
                                  ShapeDiffKind kind) {
  if (C.rows() != lambdaN.size() || C.cols() != basisM.k())
    throw Error("shape_difference_fmap: dimension mismatch");
  switch (kind) {
    case ShapeDiffKind::Area:
      return C.transpose() * C;
    case ShapeDiffKind::Conformal: {
      MatX R = basisM.lambda_pinv().asDiagonal() * (C.transpose() * lambdaN.asDiagonal() * C);
      detail::patch_constant_row(R, basisM);
      return R;
    }
    case ShapeDiffKind::Unified: {
      Eigen::PartialPivLU<MatX> lu(C);
      double rcond = lu.rcond();
      if (!(rcond > 1e-12)) throw SingularMap("shape_difference_fmap: functional map is singular");
      MatX R = basisM.lambda_pinv().asDiagonal() * lu.solve(lambdaN.asDiagonal() * C);
      detail::patch_constant_row(R, basisM);
      return R;
    }
  }
  throw Error("unreachable");
}

/// Infinitesimal shape differences of a deformation field: derivatives of the
/// three shape-difference families along the one-parameter deformation.
/// unified comes from the strain matrix, area from the lumped divergence
/// quadrature, and conformal equals unified plus the divergence-weighted
/// Dirichlet term, so the decomposition between them holds exactly.
struct InfinitesimalShapeDiffs {
  MatX area;
  MatX conformal;
  MatX unified;
};

/// Diagonal matrix of the lumped product quadrature sum_T div(V)_T mu(T)/s
/// over each simplex's vertices.
template <class Mesh>
SpMat divergence_mass_matrix(const Mesh& mesh, const MatX3& field) {
  VecX div = divergence(mesh, field);
  VecX diag = VecX::Zero(mesh.n_vertices());
  const auto& S = mesh.simplices();
  const double share = 1.0 / Mesh::simplex_size;
  for (Eigen::Index s = 0; s < S.rows(); ++s)
    for (int c = 0; c < Mesh::simplex_size; ++c)
      diag[S(s, c)] += div[s] * mesh.frame(s).measure * share;
  SpMat A(mesh.n_vertices(), mesh.n_vertices());
  std::vector<Triplet> trips;
  for (Eigen::Index v = 0; v < diag.size(); ++v)
    if (diag[v] != 0.0) trips.emplace_back(v, v, diag[v]);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

/// Stiffness with each local block weighted by the field's divergence on the
/// simplex: f^T K g = sum_T div(V)_T <grad f, grad g>_T mu(T).
template <class Mesh>
SpMat divergence_weighted_stiffness(const Mesh& mesh, const MatX3& field) {
  constexpr int k = Mesh::simplex_size;
  const auto D = detail::diff_matrix<Mesh>();
  VecX div = divergence(mesh, field);
  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(mesh.n_simplices()) * k * k);
  const auto& S = mesh.simplices();
  for (Eigen::Index s = 0; s < S.rows(); ++s) {
    const auto& fr = mesh.frame(s);
    Eigen::Matrix<double, k, k> local = div[s] * fr.measure * D.transpose() * fr.Ginv * D;
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) trips.emplace_back(S(s, a), S(s, b), local(a, b));
  }
  SpMat K(mesh.n_vertices(), mesh.n_vertices());
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

template <class Mesh>
InfinitesimalShapeDiffs infinitesimal_shape_diffs(const Mesh& mesh, const MatX3& field,
                                                  const ReducedBasis& basis) {
  InfinitesimalShapeDiffs out;
  SpMat H = assemble_strain_matrix(mesh, field);
  out.unified = reduce_h1(H, basis);
  out.area = reduce_l2(divergence_mass_matrix(mesh, field), basis);
  SpMat K = divergence_weighted_stiffness(mesh, field);
  out.conformal = reduce_h1(K, basis) + out.unified;
  return out;
}

// ---------------------------------------------------------------------------
// Low-dimensional layout of a shape collection: PCA of the vectorized
// reduced shape differences against a common base shape.

struct CollectionEmbedding {
  MatX coords;  // shapes x 2
  VecX singular_values;
};

inline CollectionEmbedding pca_embed_rows(const MatX& X) {
  MatX centered = X.rowwise() - X.colwise().mean();
  Eigen::BDCSVD<MatX> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::Index naxes = std::min<Eigen::Index>(2, svd.singularValues().size());
  CollectionEmbedding out;
  out.coords = MatX::Zero(X.rows(), 2);
  out.singular_values = svd.singularValues();
  for (Eigen::Index a = 0; a < naxes; ++a) {
    VecX axis = svd.matrixV().col(a);
    double scale = axis.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < axis.size(); ++i) {
      if (std::abs(axis[i]) > 1e-12 * scale) {
        if (axis[i] < 0) axis = -axis;
        break;
      }
    }
    out.coords.col(a) = centered * axis;
  }
  return out;
}

template <class Mesh>
CollectionEmbedding collection_embedding(const Mesh& base, const std::vector<Mesh>& shapes,
                                         const ReducedBasis& basis, ShapeDiffKind kind) {
  if (shapes.size() < 3) throw Error("collection_embedding: need at least 3 shapes");
  const Eigen::Index k = basis.k();
  MatX X(static_cast<Eigen::Index>(shapes.size()), k * k);
  for (size_t i = 0; i < shapes.size(); ++i) {
    MatX D = shape_difference_same_conn(base, shapes[i], basis, kind);
    X.row(static_cast<Eigen::Index>(i)) = vec(D).transpose();
  }
  return pca_embed_rows(X);
}

}  // namespace fundeform
