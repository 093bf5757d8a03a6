#pragma once

#include <Eigen/QR>

#include "fundeform/common.hpp"

namespace fundeform {

/// min_a 0.5 |M a - b|^2 + tau |a|_1  subject to  Aeq a = beq.
struct L1LSProblem {
  MatX M;
  VecX b;
  double tau = 0.0;
  MatX Aeq;  // 0 x p when unconstrained
  VecX beq;
};

struct SolveOptions {
  double tol = 1e-8;           // KKT residual target
  Eigen::Index max_iter = 50000;
  double admm_rho = 0.0;       // 0 picks a scale-based default
};

struct L1LSResult {
  VecX alpha;
  double objective = 0.0;
  double kkt_residual = 0.0;
  double eq_violation = 0.0;
  Eigen::Index iterations = 0;
  bool converged = false;
  std::string method;
  std::vector<double> trace;  // objective per iteration
};

namespace detail {

inline VecX soft_threshold(const VecX& x, double t) {
  return x.unaryExpr([t](double v) { return v > t ? v - t : (v < -t ? v + t : 0.0); });
}

inline double l1_objective(const MatX& M, const VecX& b, double tau, const VecX& a) {
  return 0.5 * (M * a - b).squaredNorm() + tau * a.lpNorm<1>();
}

/// Stationarity residual: g must lie in -tau * subdifferential of |a|_1.
inline double kkt_residual(const VecX& grad, const VecX& a, double tau) {
  double res = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double r = a[i] != 0.0 ? std::abs(grad[i] + tau * (a[i] > 0 ? 1.0 : -1.0))
                           : std::max(0.0, std::abs(grad[i]) - tau);
    res = std::max(res, r);
  }
  return res;
}

inline double largest_eigenvalue(const MatX& sym) {
  Eigen::SelfAdjointEigenSolver<MatX> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace detail

/// Monotone FISTA: accelerated proximal gradient that keeps the best iterate,
/// so the recorded objective never increases.
inline L1LSResult solve_l1ls_fista(const MatX& M, const VecX& b, double tau,
                                   const SolveOptions& opts = {}) {
  const Eigen::Index p = M.cols();
  MatX MtM = M.transpose() * M;
  VecX Mtb = M.transpose() * b;
  double L = detail::largest_eigenvalue(MtM);
  L1LSResult out;
  out.method = "fista";
  if (L <= 0) {  // zero map: the l1 term decides
    out.alpha = VecX::Zero(p);
    out.objective = 0.5 * b.squaredNorm();
    out.converged = true;
    return out;
  }
  const double step = 1.0 / L;
  VecX x = VecX::Zero(p), y = x, z(p);
  double fx = detail::l1_objective(M, b, tau, x);
  double t = 1.0;
  for (Eigen::Index iter = 0; iter < opts.max_iter; ++iter) {
    z = detail::soft_threshold(y - step * (MtM * y - Mtb), tau * step);
    double fz = detail::l1_objective(M, b, tau, z);
    VecX x_prev = x;
    if (fz <= fx) {
      x = z;
      fx = fz;
    }
    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = x + (t / t_next) * (z - x) + ((t - 1.0) / t_next) * (x - x_prev);
    t = t_next;
    out.trace.push_back(fx);
    out.iterations = iter + 1;
    if (iter % 10 == 0 || iter == opts.max_iter - 1) {
      double kkt = detail::kkt_residual(MtM * x - Mtb, x, tau);
      if (kkt <= opts.tol) {
        out.converged = true;
        break;
      }
    }
  }
  out.alpha = x;
  out.objective = fx;
  out.kkt_residual = detail::kkt_residual(MtM * x - Mtb, x, tau);
  if (out.kkt_residual <= opts.tol) out.converged = true;
  return out;
}

namespace detail {

/// Picks a maximal independent row subset of Aeq (deterministic), throwing
/// Infeasible when the system is inconsistent.
inline void reduce_equality_rows(MatX& Aeq, VecX& beq) {
  if (Aeq.rows() == 0) return;
  Eigen::ColPivHouseholderQR<MatX> qr(Aeq);
  qr.setThreshold(1e-10);
  const Eigen::Index rank = qr.rank();
  VecX w = qr.solve(beq);
  double violation = (Aeq * w - beq).cwiseAbs().maxCoeff();
  if (violation > 1e-8 * (1.0 + beq.cwiseAbs().maxCoeff()))
    throw Infeasible("equality constraints are inconsistent");
  if (rank == Aeq.rows()) return;
  Eigen::ColPivHouseholderQR<MatX> qrt(Aeq.transpose());
  qrt.setThreshold(1e-10);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < rank; ++i)
    keep.push_back(qrt.colsPermutation().indices()[i]);
  std::sort(keep.begin(), keep.end());
  MatX A2(rank, Aeq.cols());
  VecX b2(rank);
  for (Eigen::Index i = 0; i < rank; ++i) {
    A2.row(i) = Aeq.row(keep[static_cast<size_t>(i)]);
    b2[i] = beq[keep[static_cast<size_t>(i)]];
  }
  Aeq = std::move(A2);
  beq = std::move(b2);
}

}  // namespace detail

/// ADMM for the equality-constrained problem; the alpha update solves a KKT
/// system so the returned iterate satisfies the constraints to solver
/// precision, while the splitting variable carries the sparsity.
inline L1LSResult solve_l1ls_admm(const MatX& M, const VecX& b, double tau, const MatX& Aeq,
                                  const VecX& beq, const SolveOptions& opts = {}) {
  const Eigen::Index p = M.cols();
  const Eigen::Index m = Aeq.rows();
  MatX MtM = M.transpose() * M;
  VecX Mtb = M.transpose() * b;
  double rho = opts.admm_rho > 0 ? opts.admm_rho : std::max(MtM.trace() / p, 1e-8);

  MatX kkt = MatX::Zero(p + m, p + m);
  kkt.topLeftCorner(p, p) = MtM + rho * MatX::Identity(p, p);
  kkt.topRightCorner(p, m) = Aeq.transpose();
  kkt.bottomLeftCorner(m, p) = Aeq;
  Eigen::PartialPivLU<MatX> lu(kkt);

  L1LSResult out;
  out.method = "admm";
  VecX z = VecX::Zero(p), u = VecX::Zero(p), alpha = VecX::Zero(p), nu = VecX::Zero(m);
  VecX rhs(p + m);
  for (Eigen::Index iter = 0; iter < opts.max_iter; ++iter) {
    rhs.head(p) = Mtb + rho * (z - u);
    rhs.tail(m) = beq;
    VecX sol = lu.solve(rhs);
    alpha = sol.head(p);
    nu = sol.tail(m);
    VecX z_old = z;
    z = detail::soft_threshold(alpha + u, tau / rho);
    u += alpha - z;
    out.trace.push_back(detail::l1_objective(M, b, tau, alpha));
    out.iterations = iter + 1;
    double primal = (alpha - z).cwiseAbs().maxCoeff();
    double dual = rho * (z - z_old).cwiseAbs().maxCoeff();
    if (primal < opts.tol && dual < opts.tol) {
      VecX grad = MtM * alpha - Mtb + Aeq.transpose() * nu;
      double kkt_res = detail::kkt_residual(grad, z, tau);
      if (kkt_res <= 10 * opts.tol) {
        out.converged = true;
        break;
      }
    }
  }
  out.alpha = alpha;
  out.objective = detail::l1_objective(M, b, tau, alpha);
  VecX grad = MtM * alpha - Mtb + Aeq.transpose() * nu;
  out.kkt_residual = detail::kkt_residual(grad, z, tau);
  out.eq_violation = m > 0 ? (Aeq * alpha - beq).cwiseAbs().maxCoeff() : 0.0;
  return out;
}

/// Front door: dispatches on the presence of equality constraints.
/// Constraints are enforced exactly after dropping redundant rows;
/// inconsistent rows throw Infeasible.
inline L1LSResult solve_l1ls(const L1LSProblem& problem, const SolveOptions& opts = {}) {
  if (problem.M.cols() == 0) throw Error("solve_l1ls: empty problem");
  if (problem.b.size() != problem.M.rows()) throw Error("solve_l1ls: rhs size mismatch");
  if (problem.Aeq.rows() == 0) return solve_l1ls_fista(problem.M, problem.b, problem.tau, opts);
  if (problem.Aeq.cols() != problem.M.cols() || problem.beq.size() != problem.Aeq.rows())
    throw Error("solve_l1ls: constraint size mismatch");
  MatX Aeq = problem.Aeq;
  VecX beq = problem.beq;
  detail::reduce_equality_rows(Aeq, beq);
  return solve_l1ls_admm(problem.M, problem.b, problem.tau, Aeq, beq, opts);
}

// ---------------------------------------------------------------------------
// Plain least squares helpers used by the quadratic pipelines.

/// Minimum-norm least squares via complete orthogonal decomposition.
inline VecX lsq_minnorm(const MatX& A, const VecX& b) {
  Eigen::CompleteOrthogonalDecomposition<MatX> cod(A);
  return cod.solve(b);
}

/// Equality-constrained least squares through the KKT system; falls back to
/// a weighted minimum-norm solve when the KKT matrix is rank deficient, and
/// reports that through `rank_deficient`.
inline VecX lsq_equality(const MatX& A, const VecX& b, const MatX& Ceq, const VecX& deq,
                         bool* rank_deficient = nullptr) {
  const Eigen::Index p = A.cols(), m = Ceq.rows();
  if (rank_deficient) *rank_deficient = false;
  if (m == 0) return lsq_minnorm(A, b);
  MatX kkt = MatX::Zero(p + m, p + m);
  kkt.topLeftCorner(p, p) = A.transpose() * A;
  kkt.topRightCorner(p, m) = Ceq.transpose();
  kkt.bottomLeftCorner(m, p) = Ceq;
  Eigen::FullPivLU<MatX> lu(kkt);
  lu.setThreshold(1e-12);
  if (lu.rank() == kkt.rows()) {
    VecX rhs(p + m);
    rhs.head(p) = A.transpose() * b;
    rhs.tail(m) = deq;
    return lu.solve(rhs).head(p);
  }
  if (rank_deficient) *rank_deficient = true;
  const double w = 1e2;  // squared weight 1e4 on the constraint rows
  MatX stacked(A.rows() + m, p);
  stacked.topRows(A.rows()) = A;
  stacked.bottomRows(m) = w * Ceq;
  VecX rhs(A.rows() + m);
  rhs.head(A.rows()) = b;
  rhs.tail(m) = w * deq;
  return lsq_minnorm(stacked, rhs);
}

}  // namespace fundeform
