#pragma once

#include "fundeform/dictionary.hpp"
#include "fundeform/functional_map.hpp"
#include "fundeform/shape_difference.hpp"

namespace fundeform {

// ---------------------------------------------------------------------------
// Field recovery from an operator.

struct RecoverResult {
  MatX3 field;
  VecX alpha;
  VecX rigid_coefficients;  // component in the 6-dim rigid basis, unconstrained
  L1LSResult solve;
};

/// Sparse recovery of a field whose reduced operator matches the target:
/// min over coefficients of the squared operator mismatch plus tau * l1.
template <class Mesh>
RecoverResult recover_field(const Mesh& mesh, const Dictionary& dict, const MatX& target_reduced,
                            double tau, const SolveOptions& opts = {}) {
  if (target_reduced.rows() != dict.k || target_reduced.cols() != dict.k)
    throw Error("recover_field: target operator has wrong size");
  L1LSProblem problem;
  problem.M = dict.recovery_matrix();
  problem.b = vec(target_reduced);
  problem.tau = tau;
  RecoverResult out;
  out.solve = solve_l1ls(problem, opts);
  out.alpha = out.solve.alpha;
  out.field = dict.combine(out.alpha);
  MatX Q = rigid_field_basis(mesh.vertices());
  out.rigid_coefficients = Q.transpose() * flatten_field(out.field);
  return out;
}

/// Minimum-norm least-squares recovery over the full per-vertex basis.
template <class Mesh>
MatX3 recover_field_full_basis(const Mesh& mesh, const ReducedBasis& basis,
                               const MatX& target_reduced) {
  MatX M = full_vertex_recovery_matrix(mesh, basis);
  VecX alpha = lsq_minnorm(M, vec(target_reduced));
  return unflatten_field(alpha);
}

// ---------------------------------------------------------------------------
// Deformation transfer through a functional map.

struct TransferResult {
  MatX3 field;
  VecX alpha;
  double tau_used = 0.0;
  L1LSResult solve;
};

/// Transfers the deformation with reduced operator `reducedU` (on the source
/// shape) to the dictionary's shape through the functional map C (source
/// coefficients -> target coefficients), by matching the commutator
/// op(V) C = C op(U) in least squares with an l1 penalty. tau < 0 picks
/// 1e-4 times the largest singular value of the coefficient map.
inline TransferResult transfer(const Dictionary& dict_target, const MatX& C, const MatX& reducedU,
                               double tau = -1.0, const SolveOptions& opts = {}) {
  if (C.rows() != dict_target.k) throw Error("transfer: C rows must match target basis size");
  if (C.cols() != reducedU.rows() || reducedU.rows() != reducedU.cols())
    throw Error("transfer: C cols must match the source operator");
  const Eigen::Index rows = C.rows() * C.cols();
  L1LSProblem problem;
  problem.M.resize(rows, dict_target.size());
  for (Eigen::Index i = 0; i < dict_target.size(); ++i)
    problem.M.col(i) = vec(MatX(dict_target.ops[static_cast<size_t>(i)] * C));
  problem.b = vec(MatX(C * reducedU));
  TransferResult out;
  if (tau < 0) {
    double sigma_max = std::sqrt(detail::largest_eigenvalue(problem.M.transpose() * problem.M));
    tau = 1e-4 * sigma_max;
  }
  problem.tau = tau;
  out.tau_used = tau;
  out.solve = solve_l1ls(problem, opts);
  out.alpha = out.solve.alpha;
  out.field = dict_target.combine(out.alpha);
  return out;
}

// ---------------------------------------------------------------------------
// Deformation design under pointwise constraints.

struct DesignObjectives {
  double w_isometric = 0.0;      // penalize the operator itself
  double w_symmetric = 0.0;      // penalize op C_S - C_S op
  double w_antisymmetric = 0.0;  // penalize op C_S + C_S op
  double w_laplacian = 0.0;      // penalize op Lambda - Lambda op
  double w_smooth = 0.0;         // field Dirichlet smoothness Gram
  MatX c_self;                   // self functional map for the symmetry flags
};

struct DesignResult {
  MatX3 field;
  VecX alpha;
  L1LSResult solve;
};

namespace detail {

/// Symmetric PSD square root used to turn a quadratic Gram penalty into
/// stacked least-squares rows.
inline MatX psd_sqrt(const MatX& G) {
  Eigen::SelfAdjointEigenSolver<MatX> es(0.5 * (G + G.transpose()));
  VecX d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return d.asDiagonal() * es.eigenvectors().transpose();
}

template <class Mesh>
MatX smoothness_gram(const Mesh& mesh, const Dictionary& dict) {
  SpMat Q = field_dirichlet_form(mesh);
  MatX G(dict.size(), dict.size());
  std::vector<VecX> flat;
  flat.reserve(static_cast<size_t>(dict.size()));
  for (const MatX3& f : dict.fields) flat.push_back(flatten_field(f));
  std::vector<VecX> qflat;
  qflat.reserve(flat.size());
  for (const VecX& f : flat) qflat.push_back(Q * f);
  for (Eigen::Index i = 0; i < dict.size(); ++i)
    for (Eigen::Index j = 0; j < dict.size(); ++j)
      G(i, j) = flat[static_cast<size_t>(i)].dot(qflat[static_cast<size_t>(j)]);
  return G;
}

inline void append_operator_rows(MatX& M, Eigen::Index& row, const Dictionary& dict, double w,
                                 const std::function<MatX(const MatX&)>& transform) {
  if (w <= 0) return;
  double sw = std::sqrt(w);
  for (Eigen::Index i = 0; i < dict.size(); ++i) {
    MatX t = transform(dict.ops[static_cast<size_t>(i)]);
    M.block(row, i, t.size(), 1) = sw * vec(t);
  }
  row += dict.k * dict.k;
}

inline void constraint_rows(const Dictionary& dict, const std::vector<PointConstraint>& constraints,
                            MatX& Aeq, VecX& beq) {
  Aeq.resize(3 * static_cast<Eigen::Index>(constraints.size()), dict.size());
  beq.resize(Aeq.rows());
  for (size_t c = 0; c < constraints.size(); ++c) {
    const PointConstraint& pc = constraints[c];
    for (int axis = 0; axis < 3; ++axis) {
      Eigen::Index row = 3 * static_cast<Eigen::Index>(c) + axis;
      for (Eigen::Index i = 0; i < dict.size(); ++i)
        Aeq(row, i) = dict.fields[static_cast<size_t>(i)](pc.vertex, axis);
      beq[row] = pc.direction[axis];
    }
  }
}

}  // namespace detail

/// Designs a field over the dictionary satisfying pointwise direction
/// constraints while minimizing the selected quadratic objectives plus
/// tau * l1 on the coefficients.
template <class Mesh>
DesignResult design(const Mesh& mesh, const Dictionary& dict, const ReducedBasis& basis,
                    const std::vector<PointConstraint>& constraints,
                    const DesignObjectives& objectives, double tau,
                    const SolveOptions& opts = {}) {
  const Eigen::Index k2 = dict.k * dict.k;
  Eigen::Index rows = 0;
  if (objectives.w_isometric > 0) rows += k2;
  if (objectives.w_symmetric > 0) rows += k2;
  if (objectives.w_antisymmetric > 0) rows += k2;
  if (objectives.w_laplacian > 0) rows += k2;
  if (objectives.w_smooth > 0) rows += dict.size();
  if (rows == 0) throw Error("design: no objective selected");
  if ((objectives.w_symmetric > 0 || objectives.w_antisymmetric > 0) &&
      objectives.c_self.rows() != dict.k)
    throw Error("design: symmetry objectives need a self functional map");

  L1LSProblem problem;
  problem.M = MatX::Zero(rows, dict.size());
  problem.b = VecX::Zero(rows);
  Eigen::Index row = 0;
  detail::append_operator_rows(problem.M, row, dict, objectives.w_isometric,
                               [](const MatX& op) { return op; });
  detail::append_operator_rows(problem.M, row, dict, objectives.w_symmetric,
                               [&](const MatX& op) -> MatX {
                                 return op * objectives.c_self - objectives.c_self * op;
                               });
  detail::append_operator_rows(problem.M, row, dict, objectives.w_antisymmetric,
                               [&](const MatX& op) -> MatX {
                                 return op * objectives.c_self + objectives.c_self * op;
                               });
  detail::append_operator_rows(problem.M, row, dict, objectives.w_laplacian,
                               [&](const MatX& op) -> MatX {
                                 return op * basis.lambda.asDiagonal() -
                                        basis.lambda.asDiagonal() * op;
                               });
  if (objectives.w_smooth > 0) {
    MatX R = detail::psd_sqrt(detail::smoothness_gram(mesh, dict));
    problem.M.block(row, 0, dict.size(), dict.size()) = std::sqrt(objectives.w_smooth) * R;
    row += dict.size();
  }
  problem.tau = tau;
  detail::constraint_rows(dict, constraints, problem.Aeq, problem.beq);

  DesignResult out;
  out.solve = solve_l1ls(problem, opts);
  out.alpha = out.solve.alpha;
  out.field = dict.combine(out.alpha);
  return out;
}

struct JointDesignResult {
  MatX3 field_src;
  MatX3 field_dst;
  VecX alpha;  // source coefficients
  VecX beta;   // target coefficients
  L1LSResult solve;
};

/// Joint design on two shapes related by a functional map C (source
/// coefficients -> target coefficients): couples the two fields through the
/// operator commutator while each satisfies its own pointwise constraints.
template <class MeshA, class MeshB>
JointDesignResult joint_design(const MeshA& mesh_src, const Dictionary& dict_src,
                               const MeshB& mesh_dst, const Dictionary& dict_dst, const MatX& C,
                               const std::vector<PointConstraint>& constraints_src,
                               const std::vector<PointConstraint>& constraints_dst,
                               double w_couple, double w_smooth, double tau,
                               const SolveOptions& opts = {}) {
  if (C.rows() != dict_dst.k || C.cols() != dict_src.k)
    throw Error("joint_design: C must map source coefficients to target coefficients");
  const Eigen::Index na = dict_src.size(), nb = dict_dst.size();
  const Eigen::Index couple_rows = C.rows() * C.cols();
  Eigen::Index rows = couple_rows + (w_smooth > 0 ? na + nb : 0);
  L1LSProblem problem;
  problem.M = MatX::Zero(rows, na + nb);
  problem.b = VecX::Zero(rows);
  double sw = std::sqrt(w_couple);
  for (Eigen::Index i = 0; i < na; ++i)
    problem.M.block(0, i, couple_rows, 1) =
        sw * vec(MatX(C * dict_src.ops[static_cast<size_t>(i)]));
  for (Eigen::Index j = 0; j < nb; ++j)
    problem.M.block(0, na + j, couple_rows, 1) =
        -sw * vec(MatX(dict_dst.ops[static_cast<size_t>(j)] * C));
  Eigen::Index row = couple_rows;
  if (w_smooth > 0) {
    problem.M.block(row, 0, na, na) =
        std::sqrt(w_smooth) * detail::psd_sqrt(detail::smoothness_gram(mesh_src, dict_src));
    problem.M.block(row + na, na, nb, nb) =
        std::sqrt(w_smooth) * detail::psd_sqrt(detail::smoothness_gram(mesh_dst, dict_dst));
    row += na + nb;
  }
  MatX Aa, Ab;
  VecX ba, bb;
  detail::constraint_rows(dict_src, constraints_src, Aa, ba);
  detail::constraint_rows(dict_dst, constraints_dst, Ab, bb);
  problem.Aeq = MatX::Zero(Aa.rows() + Ab.rows(), na + nb);
  problem.Aeq.topLeftCorner(Aa.rows(), na) = Aa;
  problem.Aeq.bottomRightCorner(Ab.rows(), nb) = Ab;
  problem.beq.resize(ba.size() + bb.size());
  problem.beq << ba, bb;
  problem.tau = tau;

  JointDesignResult out;
  out.solve = solve_l1ls(problem, opts);
  out.alpha = out.solve.alpha.head(na);
  out.beta = out.solve.alpha.tail(nb);
  out.field_src = dict_src.combine(out.alpha);
  out.field_dst = dict_dst.combine(out.beta);
  return out;
}

// ---------------------------------------------------------------------------
// Intrinsic symmetrization.

struct SymmetrizeOptions {
  Eigen::Index k = 30;
  DictionarySpec dict_spec{.n_spectral = 45, .n_modal = 0, .n_handle = 0};
  double tau_reg = 1e-2;
  Eigen::Index max_iters = 3;
  double eps_factor = 1e-4;  // stop when the step is below eps_factor * bbox
};

struct SymmetrizeState {
  MatX3 vertices;
  MatX3i faces;
  std::vector<double> energy;      // ||D_pi - I||_F at each visited mesh
  std::vector<double> step_norm;   // max vertex displacement per iteration
  Eigen::Index iterations = 0;
  bool aborted = false;
  std::string note;
};

/// Iteratively deforms the mesh so the given vertex self-map becomes an
/// intrinsic isometry: each round builds the self functional map and its
/// unified shape difference, solves the linearized isometrization problem
/// over the dictionary, and displaces the vertices. Steps that would invert
/// a face are halved up to ten times before aborting.
inline SymmetrizeState symmetrize(const TriMesh& mesh0, const std::vector<int>& selfmap,
                                  const SymmetrizeOptions& opts = {}) {
  if (static_cast<Eigen::Index>(selfmap.size()) != mesh0.n_vertices())
    throw IndexError("symmetrize: self-map size mismatch");
  SymmetrizeState state;
  state.faces = mesh0.simplices();
  state.vertices = mesh0.vertices();
  TriMesh mesh = mesh0;
  const double eps = opts.eps_factor * mesh0.bbox_diagonal();
  const Eigen::Index k = std::min<Eigen::Index>(opts.k, mesh0.n_vertices());

  for (Eigen::Index iter = 0;; ++iter) {
    ReducedBasis basis = eigenbasis(mesh, k);
    VecX mass = lumped_mass(mesh);
    MatX c_pi = fmap_from_pointmap(selfmap, basis, basis, mass);
    MatX d_pi = shape_difference_fmap(basis, basis.lambda, c_pi, ShapeDiffKind::Unified);
    state.energy.push_back((d_pi - MatX::Identity(k, k)).norm());
    if (iter >= opts.max_iters) break;

    Eigen::PartialPivLU<MatX> lu(c_pi);
    if (!(lu.rcond() > 1e-12)) throw SingularMap("symmetrize: self functional map is singular");
    Dictionary dict = build_dictionary(mesh, basis, opts.dict_spec);
    const Eigen::Index k2 = k * k;
    MatX A(2 * k2, dict.size());
    VecX rhs = VecX::Zero(2 * k2);
    double sreg = std::sqrt(opts.tau_reg);
    for (Eigen::Index i = 0; i < dict.size(); ++i) {
      const MatX& op = dict.ops[static_cast<size_t>(i)];
      MatX residual = d_pi * lu.solve(op * c_pi) - op;
      A.block(0, i, k2, 1) = vec(residual);
      A.block(k2, i, k2, 1) = sreg * vec(op);
    }
    rhs.head(k2) = vec(MatX(MatX::Identity(k, k) - d_pi));
    VecX alpha = lsq_minnorm(A, rhs);
    MatX3 step = dict.combine(alpha);

    double scale = 1.0;
    bool stepped = false;
    for (int attempt = 0; attempt < 10 && !stepped; ++attempt, scale *= 0.5) {
      try {
        TriMesh candidate = TriMesh::build(mesh.vertices() + scale * step, mesh.simplices());
        mesh = std::move(candidate);
        stepped = true;
      } catch (const DegenerateSimplex&) {
      }
    }
    if (!stepped) {
      state.aborted = true;
      state.note = "step inverts a face even after 10 halvings";
      break;
    }
    double step_norm = (scale * step).rowwise().norm().maxCoeff();
    state.step_norm.push_back(step_norm);
    state.iterations = iter + 1;
    state.vertices = mesh.vertices();
    if (step_norm < eps) {
      ReducedBasis b2 = eigenbasis(mesh, k);
      MatX c2 = fmap_from_pointmap(selfmap, b2, b2, lumped_mass(mesh));
      MatX d2 = shape_difference_fmap(b2, b2.lambda, c2, ShapeDiffKind::Unified);
      state.energy.push_back((d2 - MatX::Identity(k, k)).norm());
      break;
    }
  }
  return state;
}

}  // namespace fundeform
