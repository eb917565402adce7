#include "slsf/sls_core.hpp"

#include <random>

#include <gtest/gtest.h>

#include "slsf/error.hpp"
#include "test_util.hpp"

namespace slsf {
namespace {

using test::near;

SafetyProblem scalar_problem(double a, int N) {
  SafetyProblem p;
  p.A = MatrixXd::Constant(1, 1, a);
  p.B = MatrixXd::Ones(1, 1);
  p.B_w = MatrixXd::Constant(1, 1, 0.1);
  p.X = poly::Box(VectorXd::Zero(1), VectorXd::Ones(1)).to_polytope();
  p.U = p.X;
  p.N = N;
  return p;
}

// Closed-loop map: Phi_x = (I - ZA - ZB K)^-1 E computed by explicit rollout of
// unit disturbances, independent of the library's stacked inverse.
SystemResponses rollout_responses(const SafetyProblem& p, const BlockLowerTriangular& K,
                                  const MatrixXd& first) {
  const int n = p.n(), m = p.m(), N = p.N;
  const int q0 = static_cast<int>(first.cols()), nw = p.n_w();
  const int cols = q0 + N * nw;
  MatrixXd X = MatrixXd::Zero((N + 1) * n, cols), U = MatrixXd::Zero((N + 1) * m, cols);
  for (int col = 0; col < cols; ++col) {
    std::vector<VectorXd> dx(N + 1, VectorXd::Zero(n));
    if (col < q0) dx[0] = first.col(col);
    for (int t = 0; t <= N; ++t) {
      VectorXd du = VectorXd::Zero(m);
      for (int s = 0; s <= t; ++s) du += K.block(t, s) * dx[s];
      X.block(t * n, col, n, 1) = dx[t];
      U.block(t * m, col, m, 1) = du;
      if (t == N) break;
      dx[t + 1] = p.A * dx[t] + p.B * du;
      const int c = col - q0;
      if (c >= 0 && c / nw == t) dx[t + 1] += p.B_w.col(c % nw);
    }
  }
  return {BlockLowerTriangular::from_dense(X, N, n, nw, q0),
          BlockLowerTriangular::from_dense(U, N, m, nw, q0)};
}

GTEST_TEST(BlockLowerTriangularTest, StructureAndAccess) {
  BlockLowerTriangular M(2, 2, 3, 1);
  EXPECT_EQ(M.rows(), 6);
  EXPECT_EQ(M.cols(), 1 + 2 * 3);
  M.block(2, 1) = MatrixXd::Ones(2, 3);
  M.block(1, 0) = MatrixXd::Constant(2, 1, 4.0);
  EXPECT_THROW(M.block(0, 1), Error);
  const MatrixXd D = M.dense();
  EXPECT_EQ(D.block(4, 1, 2, 3), MatrixXd::Ones(2, 3));
  EXPECT_EQ(D.block(0, 1, 2, 6), MatrixXd::Zero(2, 6));
  EXPECT_EQ(M.block_row(1).leftCols(1), MatrixXd::Constant(2, 1, 4.0));
  EXPECT_EQ(M.lag_block(2, 1), M.block(2, 1));
  const auto back = BlockLowerTriangular::from_dense(D, 2, 2, 3, 1);
  EXPECT_EQ(back.dense(), D);
}

GTEST_TEST(StackedSystemTest, ScalarDownshift) {
  const auto sys = build_stacked(scalar_problem(0.7, 1), MatrixXd::Identity(1, 1));
  MatrixXd expected(2, 2);
  expected << 0, 0, 0.7, 0;
  EXPECT_EQ(sys.ZA, expected);
}

GTEST_TEST(StackedSystemTest, DoubleIntegratorStructure) {
  const SafetyProblem p = test::double_integrator(2);
  const auto sys = build_stacked(p, MatrixXd::Identity(2, 2));
  EXPECT_TRUE(near(sys.ZA * sys.ZA * sys.ZA, MatrixXd::Zero(6, 6), 0.0));
  EXPECT_FALSE(near(sys.ZA * sys.ZA, MatrixXd::Zero(6, 6), 0.0));
  EXPECT_EQ(sys.E.block(0, 0), MatrixXd::Identity(2, 2));
  EXPECT_EQ(sys.E.block(1, 1), 0.3 * MatrixXd::Identity(2, 2));
  EXPECT_EQ(sys.E.block(2, 2), 0.3 * MatrixXd::Identity(2, 2));
  EXPECT_EQ(sys.E.block(2, 1), MatrixXd::Zero(2, 2));
  EXPECT_THROW(build_stacked(p, MatrixXd::Identity(3, 3)), Error);
}

GTEST_TEST(SubspaceTest, OpenLoopAndRandomControllers) {
  const SafetyProblem p = test::double_integrator(4);
  const auto sys = build_stacked(p, MatrixXd::Identity(2, 2));
  const BlockLowerTriangular zero(p.N, 1, 2, 2);
  const SystemResponses open = responses_from_controller(sys, zero);
  EXPECT_LE(subspace_residual(open, sys), 1e-12);
  EXPECT_TRUE(near(open.Phi_u.dense(), MatrixXd::Zero(5, 10), 0.0));

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto K = test::random_controller(p.N, 1, 2, rng);
    const SystemResponses r = responses_from_controller(sys, K);
    EXPECT_LE(subspace_residual(r, sys), 1e-9);
    const SystemResponses ref = rollout_responses(p, K, MatrixXd::Identity(2, 2));
    EXPECT_TRUE(near(r.Phi_x.dense(), ref.Phi_x.dense(), 1e-9));
    EXPECT_TRUE(near(r.Phi_u.dense(), ref.Phi_u.dense(), 1e-9));

    SystemResponses bad = r;
    bad.Phi_x.block(2, 1)(0, 0) += 1e-3;
    EXPECT_GE(subspace_residual(bad, sys), 1e-4);
  }
}

GTEST_TEST(SubspaceTest, ControllerRoundTrip) {
  const SafetyProblem p = test::double_integrator(5);
  const auto sys = build_stacked(p, MatrixXd::Identity(2, 2));
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto K = test::random_controller(p.N, 1, 2, rng);
    const SystemResponses r = responses_from_controller(sys, K);
    const BlockLowerTriangular K2 = controller_from_responses(r);
    const SystemResponses r2 = responses_from_controller(sys, K2);
    EXPECT_TRUE(near(r2.Phi_x.dense(), r.Phi_x.dense(), 1e-6));
    EXPECT_TRUE(near(r2.Phi_u.dense(), r.Phi_u.dense(), 1e-6));
  }
  const SystemResponses open = responses_from_controller(sys, BlockLowerTriangular(p.N, 1, 2, 2));
  EXPECT_TRUE(near(controller_from_responses(open).dense(), MatrixXd::Zero(6, 12), 1e-12));
}

GTEST_TEST(SubspaceTest, SingleBlockController) {
  SafetyProblem p = scalar_problem(1.5, 0);
  SystemResponses r{BlockLowerTriangular(0, 1, 1, 1), BlockLowerTriangular(0, 1, 1, 1)};
  r.Phi_x.block(0, 0)(0, 0) = 2.0;
  r.Phi_u.block(0, 0)(0, 0) = -3.0;
  EXPECT_NEAR(controller_from_responses(r).block(0, 0)(0, 0), -1.5, 1e-15);
  r.Phi_x.block(0, 0)(0, 0) = 0.0;
  try {
    controller_from_responses(r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingularResponse);
  }
}

GTEST_TEST(TighteningTest, MatchesVertexBruteForce) {
  const SafetyProblem p = test::double_integrator(3);
  const auto sys = build_stacked(p, MatrixXd(2, 0));
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const auto K = test::random_controller(p.N, 1, 2, rng);
    const SystemResponses r = responses_from_controller(sys, K);
    for (int k = 0; k <= p.N; ++k) {
      for (int row = 0; row < p.X.num_rows(); ++row) {
        const VectorXd a = p.X.A().row(row).transpose();
        EXPECT_NEAR(tighten_row(a, r, k, MatrixXd(0, 0)),
                    test::worst_case_row(p, K, a, k, false), 1e-9);
      }
      for (int row = 0; row < p.U.num_rows(); ++row) {
        const VectorXd a = p.U.A().row(row).transpose();
        EXPECT_NEAR(tighten_row(a, r, k, MatrixXd(0, 0), RowKind::kInput),
                    test::worst_case_row(p, K, a, k, true), 1e-9);
      }
    }
    EXPECT_EQ(tighten_row(p.X.A().row(0).transpose(), r, 0, MatrixXd(0, 0)), 0.0);
  }
}

GTEST_TEST(TighteningTest, InitialConditionTerm) {
  // With the initial column present, the margin adds the worst case over
  // x_0 in P_init B_inf: enumerate the 4 initial vertices times 16 sequences.
  const SafetyProblem p = test::double_integrator(2);
  const auto sys = build_stacked(p, MatrixXd::Identity(2, 2));
  std::mt19937_64 rng(23);
  const auto K = test::random_controller(p.N, 1, 2, rng);
  const SystemResponses r = responses_from_controller(sys, K);
  const MatrixXd P_init = 0.5 * MatrixXd::Identity(2, 2);
  const VectorXd a = Eigen::Vector2d(1, -2);
  for (int k = 0; k <= p.N; ++k) {
    double worst = -1e300;
    for (const auto& x0 : test::cube_vertices(2))
      for (const auto& w0 : test::cube_vertices(2))
        for (const auto& w1 : test::cube_vertices(2)) {
          VectorXd delta(6);
          delta << P_init * x0, w0, w1;
          worst = std::max(worst, (a.transpose() * r.Phi_x.block_row(k) * delta)(0));
        }
    EXPECT_NEAR(tighten_row(a, r, k, P_init), worst, 1e-12);
  }
}

GTEST_TEST(TighteningTest, ReachableBoxOpenLoop) {
  const SafetyProblem p = test::double_integrator(2);
  const auto sys = build_stacked(p, MatrixXd(2, 0));
  const BlockLowerTriangular zero(p.N, 1, 2, 2);
  const SystemResponses r = responses_from_controller(sys, zero);
  const VectorXd z = Eigen::Vector2d(0.3, -0.1);
  const poly::Box b = reachable_box(z, r, 2, MatrixXd(0, 0));
  for (int j = 0; j < 2; ++j) {
    VectorXd e = VectorXd::Zero(2);
    e(j) = 1.0;
    EXPECT_NEAR(b.half_widths(j), test::worst_case_row(p, zero, e, 2, false), 1e-12);
  }
  // Row sums of |[A B_w, B_w]| times the disturbance bound.
  MatrixXd M(2, 4);
  M << p.A * p.B_w, p.B_w;
  EXPECT_TRUE(near(b.half_widths, M.cwiseAbs().rowwise().sum(), 1e-12));
  EXPECT_TRUE(b.contains(z));
  EXPECT_TRUE(near(reachable_box(z, r, 0, MatrixXd(0, 0)).half_widths, VectorXd::Zero(2), 0.0));
}

GTEST_TEST(CausalityTest, FutureDisturbancesDoNotAffectInputs) {
  const SafetyProblem p = test::double_integrator(4);
  const auto sys = build_stacked(p, MatrixXd::Identity(2, 2));
  std::mt19937_64 rng(4);
  const SystemResponses r = responses_from_controller(sys, test::random_controller(4, 1, 2, rng));
  std::normal_distribution<double> g;
  VectorXd delta = VectorXd::NullaryExpr(10, [&] { return g(rng); });
  const VectorXd u = r.Phi_u.dense() * delta;
  for (int k = 0; k < p.N; ++k) {
    VectorXd d2 = delta;
    for (int i = 2 + 2 * k; i < 10; ++i) d2(i) += 10.0;  // disturbances w_k, w_{k+1}, ...
    const VectorXd u2 = r.Phi_u.dense() * d2;
    EXPECT_NEAR(u2(k), u(k), 1e-12);
  }
}

GTEST_TEST(RectangularDisturbanceTest, PropertiesHoldWithFewerDisturbances) {
  SafetyProblem p = test::double_integrator(3);
  p.B_w = MatrixXd((MatrixXd(2, 1) << 0.1, 0.3).finished());
  const auto sys = build_stacked(p, MatrixXd(2, 0));
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const auto K = test::random_controller(p.N, 1, 2, rng);
    const SystemResponses r = responses_from_controller(sys, K);
    EXPECT_LE(subspace_residual(r, sys), 1e-9);
    for (int k = 0; k <= p.N; ++k)
      for (int row = 0; row < p.X.num_rows(); ++row) {
        const VectorXd a = p.X.A().row(row).transpose();
        EXPECT_NEAR(tighten_row(a, r, k, MatrixXd(0, 0)),
                    test::worst_case_row(p, K, a, k, false), 1e-9);
      }
  }
}

GTEST_TEST(SafetyProblemTest, Validation) {
  SafetyProblem p = test::double_integrator();
  EXPECT_NO_THROW(p.validate(true));
  SafetyProblem bad = p;
  bad.B = MatrixXd::Ones(3, 1);
  EXPECT_THROW(bad.validate(false), Error);
  bad = p;
  bad.terminal = poly::Box(VectorXd::Zero(2), VectorXd::Constant(2, 6.0)).to_polytope();
  EXPECT_THROW(bad.validate(true), Error);
}

}  // namespace
}  // namespace slsf
