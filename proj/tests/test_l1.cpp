#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <fundeform/fundeform.hpp>

#include "testutil.hpp"

using namespace fundeform;
using Catch::Matchers::WithinAbs;

namespace {

MatX random_matrix(Eigen::Index rows, Eigen::Index cols, uint64_t seed) {
  auto gen = testutil::rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  MatX m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(gen);
  return m;
}

/// Cyclic coordinate descent with exact single-coordinate minimization;
/// an independent check on the proximal-gradient path.
VecX coordinate_descent_oracle(const MatX& M, const VecX& b, double tau, int sweeps = 20000,
                               double tol = 1e-14) {
  MatX MtM = M.transpose() * M;
  VecX Mtb = M.transpose() * b;
  VecX alpha = VecX::Zero(M.cols());
  VecX mta = VecX::Zero(M.cols());  // MtM * alpha
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double change = 0.0;
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      double old = alpha[j];
      double r = Mtb[j] - mta[j] + MtM(j, j) * old;
      double next = 0.0;
      if (r > tau)
        next = (r - tau) / MtM(j, j);
      else if (r < -tau)
        next = (r + tau) / MtM(j, j);
      if (next != old) {
        mta += (next - old) * MtM.col(j);
        alpha[j] = next;
        change += std::abs(next - old);
      }
    }
    if (change < tol) break;
  }
  return alpha;
}

double objective(const MatX& M, const VecX& b, double tau, const VecX& a) {
  return 0.5 * (M * a - b).squaredNorm() + tau * a.lpNorm<1>();
}

}  // namespace

TEST_CASE("near-zero penalty recovers an exact solution") {
  MatX M = random_matrix(40, 10, 1);
  VecX b = M * VecX::Unit(10, 3);
  L1LSProblem problem{M, b, 1e-12, MatX(0, 10), VecX(0)};
  auto result = solve_l1ls(problem);
  REQUIRE(result.converged);
  REQUIRE((result.alpha - VecX::Unit(10, 3)).norm() < 1e-6);
  REQUIRE((M * result.alpha - b).norm() <= 1e-8);
}

TEST_CASE("synthetic sparse instance: exact support recovery") {
  MatX M = random_matrix(200, 60, 2);
  for (Eigen::Index j = 0; j < M.cols(); ++j) M.col(j).normalize();
  VecX truth = VecX::Zero(60);
  truth[3] = 1.2;
  truth[17] = -0.8;
  truth[29] = 2.0;
  truth[41] = -1.5;
  truth[55] = 0.6;
  VecX b = M * truth;
  double tau = 1e-5 * (M.transpose() * b).cwiseAbs().maxCoeff();
  L1LSProblem problem{M, b, tau, MatX(0, 60), VecX(0)};
  SolveOptions opts;
  opts.tol = 1e-10;
  auto result = solve_l1ls(problem, opts);
  REQUIRE(result.converged);
  for (Eigen::Index j = 0; j < 60; ++j) {
    if (truth[j] != 0.0)
      REQUIRE(result.alpha[j] != 0.0);
    else
      REQUIRE(result.alpha[j] == 0.0);
  }
  REQUIRE((result.alpha - truth).norm() <= 1e-4);

  VecX cd = coordinate_descent_oracle(M, b, tau);
  double fo = objective(M, b, tau, result.alpha);
  double fcd = objective(M, b, tau, cd);
  REQUIRE(std::abs(fo - fcd) <= 1e-8 * (std::abs(fcd) + 1.0));
}

TEST_CASE("large penalty kills every coordinate") {
  MatX M = random_matrix(30, 12, 3);
  VecX b = random_matrix(30, 1, 4).col(0);
  double tau = (M.transpose() * b).cwiseAbs().maxCoeff() * 1.001;
  L1LSProblem problem{M, b, tau, MatX(0, 12), VecX(0)};
  auto result = solve_l1ls(problem);
  REQUIRE(result.converged);
  REQUIRE(result.alpha.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("objective trace is non-increasing and the kkt residual certified") {
  MatX M = random_matrix(80, 25, 5);
  VecX b = random_matrix(80, 1, 6).col(0);
  L1LSProblem problem{M, b, 0.05, MatX(0, 25), VecX(0)};
  SolveOptions opts;
  opts.tol = 1e-9;
  auto result = solve_l1ls(problem, opts);
  REQUIRE(result.converged);
  REQUIRE(result.kkt_residual <= 1e-9);
  for (size_t i = 1; i < result.trace.size(); ++i)
    REQUIRE(result.trace[i] <= result.trace[i - 1] + 1e-15);
}

TEST_CASE("equality constraints") {
  MatX M = random_matrix(50, 20, 7);
  VecX b = random_matrix(50, 1, 8).col(0);
  SECTION("hard constraints hold to solver precision") {
    MatX Aeq = random_matrix(3, 20, 9);
    VecX beq(3);
    beq << 1.0, -0.5, 0.25;
    L1LSProblem problem{M, b, 0.01, Aeq, beq};
    auto result = solve_l1ls(problem);
    REQUIRE(result.eq_violation < 1e-10);
    REQUIRE(result.converged);
    REQUIRE(result.kkt_residual <= 1e-7);
  }
  SECTION("duplicated consistent rows are dropped") {
    MatX Aeq(2, 20);
    Aeq.row(0) = random_matrix(1, 20, 10).row(0);
    Aeq.row(1) = 2.0 * Aeq.row(0);
    VecX beq(2);
    beq << 0.7, 1.4;
    L1LSProblem problem{M, b, 0.01, Aeq, beq};
    auto result = solve_l1ls(problem);
    REQUIRE(result.eq_violation < 1e-10);
  }
  SECTION("conflicting rows are infeasible") {
    MatX Aeq(2, 20);
    Aeq.row(0) = random_matrix(1, 20, 11).row(0);
    Aeq.row(1) = Aeq.row(0);
    VecX beq(2);
    beq << 1.0, 2.0;
    L1LSProblem problem{M, b, 0.01, Aeq, beq};
    REQUIRE_THROWS_AS(solve_l1ls(problem), Infeasible);
  }
  SECTION("constrained solution matches the penalty limit") {
    // with tau = 0 the ADMM answer solves the equality-constrained least
    // squares problem; cross-check against the KKT solver
    MatX Aeq = random_matrix(2, 20, 12);
    VecX beq(2);
    beq << 0.1, -0.2;
    L1LSProblem problem{M, b, 0.0, Aeq, beq};
    auto result = solve_l1ls(problem);
    VecX direct = lsq_equality(M, b, Aeq, beq);
    REQUIRE((result.alpha - direct).norm() < 1e-6 * (direct.norm() + 1.0));
  }
}

TEST_CASE("lsq helpers") {
  SECTION("minimum-norm solve of a rank-deficient system") {
    MatX A(4, 3);
    A << 1, 0, 1, 0, 1, 1, 1, 1, 2, 2, 1, 3;  // col3 = col1 + col2
    VecX b(4);
    b << 1, 1, 2, 3;
    VecX x = lsq_minnorm(A, b);
    REQUIRE((A * x - b).norm() < 1e-10);
  }
  SECTION("rank-deficient kkt falls back to the weighted path") {
    MatX A = MatX::Zero(3, 3);  // zero objective, constraints only
    VecX b = VecX::Zero(3);
    MatX Ceq(1, 3);
    Ceq << 1, 1, 1;
    VecX deq(1);
    deq << 3.0;
    bool rank_deficient = false;
    VecX x = lsq_equality(A, b, Ceq, deq, &rank_deficient);
    REQUIRE((Ceq * x - deq).cwiseAbs().maxCoeff() < 1e-6);
  }
}
