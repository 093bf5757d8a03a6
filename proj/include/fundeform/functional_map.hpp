#pragma once

#include "fundeform/fem.hpp"
#include "fundeform/l1.hpp"

namespace fundeform {

/// Functional map from a vertex correspondence corr: N -> M (corr[i] is the
/// M-vertex matched to N-vertex i): C = Phi_N^T A_N P Phi_M, mapping reduced
/// coefficients on M to reduced coefficients on N.
inline MatX fmap_from_pointmap(const std::vector<int>& corr, const ReducedBasis& basisM,
                               const ReducedBasis& basisN, const VecX& massN) {
  if (static_cast<Eigen::Index>(corr.size()) != basisN.n())
    throw IndexError("fmap_from_pointmap: correspondence size mismatch");
  MatX pulled(basisN.n(), basisM.k());
  for (size_t i = 0; i < corr.size(); ++i) {
    if (corr[i] < 0 || corr[i] >= basisM.n())
      throw IndexError("fmap_from_pointmap: vertex index out of range");
    pulled.row(static_cast<Eigen::Index>(i)) = basisM.phi.row(corr[i]);
  }
  return basisN.phi.transpose() * massN.asDiagonal() * pulled;
}

inline MatX blend_fmaps(const MatX& c_direct, const MatX& c_symmetric, double tau_blend) {
  if (c_direct.rows() != c_symmetric.rows() || c_direct.cols() != c_symmetric.cols())
    throw Error("blend_fmaps: dimension mismatch");
  return tau_blend * c_symmetric + (1.0 - tau_blend) * c_direct;
}

inline double commutator_norm(const MatX& C, const MatX& opM, const MatX& opN) {
  return (C * opM - opN * C).norm();
}

struct FmapInferOptions {
  double w_laplacian = 1.0;
  double w_extrinsic = 1.0;  // 0 disables the extrinsic term
};

struct FmapInferResult {
  MatX C;
  bool rank_deficient = false;
  double laplacian_commutator = 0.0;
  double extrinsic_commutator = 0.0;
};

/// Least-squares functional map from commutativity with the Laplace-Beltrami
/// eigenvalues and (optionally) the normal-field operators, under hard
/// landmark constraints C delta_M = delta_N with mass-weighted indicator
/// coefficients. Dense solve over vec(C); meant for moderate basis sizes.
inline FmapInferResult fmap_infer(const ReducedBasis& basisM, const ReducedBasis& basisN,
                                  const MatX& opM, const MatX& opN,
                                  const std::vector<std::pair<int, int>>& landmarks,
                                  const VecX& massM, const VecX& massN,
                                  const FmapInferOptions& opts = {}) {
  const Eigen::Index kM = basisM.k(), kN = basisN.k();
  const Eigen::Index nvec = kM * kN;
  auto vec_index = [kN](Eigen::Index i, Eigen::Index j) { return i + j * kN; };

  Eigen::Index rows = nvec + (opts.w_extrinsic > 0 ? nvec : 0);
  MatX A = MatX::Zero(rows, nvec);
  // (C Lambda_M - Lambda_N C)_{ij} = C_ij (lambdaM_j - lambdaN_i): diagonal.
  double wl = std::sqrt(opts.w_laplacian);
  for (Eigen::Index j = 0; j < kM; ++j)
    for (Eigen::Index i = 0; i < kN; ++i)
      A(vec_index(i, j), vec_index(i, j)) = wl * (basisM.lambda[j] - basisN.lambda[i]);
  if (opts.w_extrinsic > 0) {
    if (opM.rows() != kM || opN.rows() != kN)
      throw Error("fmap_infer: operator dimensions do not match the bases");
    double we = std::sqrt(opts.w_extrinsic);
    // vec(C opM - opN C) = (opM^T kron I - I kron opN) vec(C)
    for (Eigen::Index j = 0; j < kM; ++j)
      for (Eigen::Index i = 0; i < kN; ++i) {
        Eigen::Index row = nvec + vec_index(i, j);
        for (Eigen::Index l = 0; l < kM; ++l) A(row, vec_index(i, l)) += we * opM(l, j);
        for (Eigen::Index l = 0; l < kN; ++l) A(row, vec_index(l, j)) -= we * opN(i, l);
      }
  }

  MatX Ceq = MatX::Zero(static_cast<Eigen::Index>(landmarks.size()) * kN, nvec);
  VecX deq(Ceq.rows());
  for (size_t l = 0; l < landmarks.size(); ++l) {
    auto [vm, vn] = landmarks[l];
    if (vm < 0 || vm >= basisM.n() || vn < 0 || vn >= basisN.n())
      throw IndexError("fmap_infer: landmark index out of range");
    VecX dM = massM[vm] * basisM.phi.row(vm).transpose();
    VecX dN = massN[vn] * basisN.phi.row(vn).transpose();
    for (Eigen::Index i = 0; i < kN; ++i) {
      Eigen::Index row = static_cast<Eigen::Index>(l) * kN + i;
      for (Eigen::Index j = 0; j < kM; ++j) Ceq(row, vec_index(i, j)) = dM[j];
      deq[row] = dN[i];
    }
  }

  FmapInferResult out;
  VecX sol = lsq_equality(A, VecX::Zero(rows), Ceq, deq, &out.rank_deficient);
  out.C = Eigen::Map<MatX>(sol.data(), kN, kM);
  out.laplacian_commutator =
      (out.C * basisM.lambda.asDiagonal() - basisN.lambda.asDiagonal() * out.C).norm();
  if (opM.size() > 0 && opN.size() > 0)
    out.extrinsic_commutator = commutator_norm(out.C, opM, opN);
  return out;
}

/// Converts a functional map to a vertex correspondence N -> M by nearest
/// neighbors between the rows of Phi_N and Phi_M C^T; ties break toward the
/// lowest index.
inline std::vector<int> fmap_to_pointmap(const MatX& C, const ReducedBasis& basisM,
                                         const ReducedBasis& basisN) {
  if (C.rows() != basisN.k() || C.cols() != basisM.k()) throw Error("fmap_to_pointmap: bad C");
  MatX embM = basisM.phi * C.transpose();  // n_M x k_N
  std::vector<int> corr(static_cast<size_t>(basisN.n()));
  for (Eigen::Index i = 0; i < basisN.n(); ++i) {
    int best = 0;
    double best_d = (embM.row(0) - basisN.phi.row(i)).squaredNorm();
    for (Eigen::Index v = 1; v < embM.rows(); ++v) {
      double d = (embM.row(v) - basisN.phi.row(i)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(v);
      }
    }
    corr[static_cast<size_t>(i)] = best;
  }
  return corr;
}

}  // namespace fundeform
