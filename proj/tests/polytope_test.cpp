#include "slsf/polytope.hpp"

#include <random>

#include <gtest/gtest.h>

#include "slsf/error.hpp"
#include "test_util.hpp"

namespace slsf {
namespace poly {
namespace {

Polytope box(const VectorXd& h) { return Box(VectorXd::Zero(h.size()), h).to_polytope(); }
Polytope interval(double lo, double hi) {
  return Polytope(MatrixXd((MatrixXd(2, 1) << 1, -1).finished()), Eigen::Vector2d(hi, -lo));
}

std::vector<VectorXd> sample_in(const Polytope& P, int count, std::uint64_t seed) {
  const Box bb = P.bounding_box();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<VectorXd> out;
  while (static_cast<int>(out.size()) < count) {
    VectorXd x = bb.center;
    for (int i = 0; i < x.size(); ++i) x(i) += bb.half_widths(i) * d(rng);
    if (P.contains(x, 0.0)) out.push_back(x);
  }
  return out;
}

GTEST_TEST(BoxTest, GeometryAndConversion) {
  const Box b(Eigen::Vector2d(1, -1), Eigen::Vector2d(2, 0.5));
  EXPECT_EQ(b.to_polytope().num_rows(), 4);
  EXPECT_DOUBLE_EQ(b.support(Eigen::Vector2d(1, 0)), 3.0);
  EXPECT_DOUBLE_EQ(b.support(Eigen::Vector2d(0, -1)), 1.5);
  EXPECT_EQ(b.vertices().size(), 4u);
  EXPECT_TRUE(b.contains(Eigen::Vector2d(-1, -0.5)));
  EXPECT_FALSE(b.contains(Eigen::Vector2d(-1.1, -0.5)));
}

GTEST_TEST(PolytopeTest, SupportFunction) {
  const Polytope unit = box(Eigen::Vector2d(1, 1));
  EXPECT_NEAR(support(unit, Eigen::Vector2d(1, 0)), 1.0, 1e-12);
  EXPECT_NEAR(support(Polytope::point(Eigen::Vector2d(0, 0)), Eigen::Vector2d(3, -2)), 0.0, 1e-12);

  // Vertex enumeration oracle over the four corners of the state box.
  const Polytope X = box(Eigen::Vector2d(5, 5));
  const Eigen::Vector2d a(1, 1);
  double best = -1e300;
  for (const auto& v : test::cube_vertices(2)) best = std::max(best, a.dot(5.0 * v));
  EXPECT_NEAR(support(X, a), best, 1e-12);

  const Polytope half(MatrixXd((MatrixXd(1, 2) << 1, 0).finished()), VectorXd::Ones(1));
  try {
    support(half, Eigen::Vector2d(-1, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnbounded);
  }
  try {
    support(Polytope::empty_set(2), Eigen::Vector2d(1, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasible);
  }
}

GTEST_TEST(PolytopeTest, EmptinessAndBoundedness) {
  EXPECT_TRUE(Polytope::empty_set(2).is_empty());
  EXPECT_FALSE(box(Eigen::Vector2d(1, 1)).is_empty());
  EXPECT_TRUE(box(Eigen::Vector2d(1, 1)).is_bounded());
  const Polytope half(MatrixXd((MatrixXd(1, 2) << 1, 0).finished()), VectorXd::Ones(1));
  EXPECT_FALSE(half.is_bounded());
  const auto cheb = box(Eigen::Vector2d(2, 1)).chebyshev();
  ASSERT_TRUE(cheb.has_value());
  EXPECT_NEAR(cheb->second, 1.0, 1e-9);
}

GTEST_TEST(PolytopeTest, MinkowskiSum) {
  const Polytope unit = box(Eigen::Vector2d(1, 1));
  EXPECT_TRUE(set_equal(minkowski_sum(unit, unit), box(Eigen::Vector2d(2, 2))));

  const Polytope zero = Polytope::point(Eigen::Vector2d(0, 0));
  const Polytope tri = convex_hull({Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0),
                                    Eigen::Vector2d(0, 1)}, 2);
  const Polytope same = minkowski_sum(tri, zero);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-1.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector2d x(d(rng), d(rng));
    EXPECT_EQ(same.contains(x), tri.contains(x));
  }

  // Vertex-sum oracle: hull of all pairwise vertex sums.
  std::vector<VectorXd> sums;
  for (const auto& p : vertices(tri))
    for (const auto& q : vertices(unit)) sums.push_back(p + q);
  const Polytope oracle = convex_hull(sums, 2);
  const Polytope sum = minkowski_sum(tri, unit);
  EXPECT_TRUE(set_equal(sum, oracle));
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector2d a(d(rng), d(rng));
    EXPECT_NEAR(support(sum, a), support(tri, a) + support(unit, a), 1e-9);
  }
}

GTEST_TEST(PolytopeTest, SupportAdditivityInThreeDimensions) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  const MatrixXd G1 = MatrixXd::NullaryExpr(3, 3, [&] { return g(rng); });
  const MatrixXd G2 = MatrixXd::NullaryExpr(3, 2, [&] { return g(rng); });
  const Polytope P = zonotope(VectorXd::Zero(3), G1);
  const Polytope Q = zonotope(Eigen::Vector3d(1, 0, -1), G2);
  const Polytope S = minkowski_sum(P, Q);
  for (int i = 0; i < 30; ++i) {
    const Eigen::Vector3d a(g(rng), g(rng), g(rng));
    EXPECT_NEAR(support(S, a), support(P, a) + support(Q, a), 1e-8);
  }
}

GTEST_TEST(PolytopeTest, PontryaginDifference) {
  const Polytope P = box(Eigen::Vector2d(3, 2));
  const Polytope Q = box(Eigen::Vector2d(1, 0.5));
  EXPECT_TRUE(set_equal(pontryagin_diff(P, Q), box(Eigen::Vector2d(2, 1.5))));
  const Polytope D = pontryagin_diff(P, Q);
  for (const auto& x : sample_in(D, 50, 3))
    for (const auto& q : vertices(Q)) EXPECT_TRUE(P.contains(x + q, 1e-9));
}

GTEST_TEST(PolytopeTest, PreSet) {
  const Polytope P = box(Eigen::Vector2d(1, 2));
  EXPECT_TRUE(set_equal(pre_set(P, MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 2), Box::unit(2)), P));
  // |0.5 x| <= 1 - 0.1  ->  |x| <= 1.8
  const Polytope s = pre_set(interval(-1, 1), MatrixXd::Constant(1, 1, 0.5),
                             MatrixXd::Constant(1, 1, 0.1), Box::unit(1));
  EXPECT_TRUE(set_equal(s, interval(-1.8, 1.8)));
}

GTEST_TEST(PolytopeTest, VerticesAndHullRoundTrip) {
  const Polytope P = convex_hull({Eigen::Vector2d(0, 0), Eigen::Vector2d(2, 0),
                                  Eigen::Vector2d(2, 1), Eigen::Vector2d(0, 3),
                                  Eigen::Vector2d(1, 1)}, 2);
  EXPECT_EQ(vertices(P).size(), 4u);
  EXPECT_TRUE(set_equal(convex_hull(vertices(P), 2), P));
  EXPECT_THROW(vertices(box(VectorXd::Ones(4))), Error);
}

GTEST_TEST(PolytopeTest, ContainmentIsAPartialOrder) {
  const Polytope a = box(Eigen::Vector2d(1, 1));
  const Polytope b = box(Eigen::Vector2d(2, 2));
  const Polytope c = box(Eigen::Vector2d(3, 2.5));
  EXPECT_TRUE(contains_set(a, a));
  EXPECT_TRUE(contains_set(b, a));
  EXPECT_FALSE(contains_set(a, b));
  EXPECT_TRUE(contains_set(c, b) && contains_set(b, a) && contains_set(c, a));
  const Polytope a2 = convex_hull(vertices(a), 2);
  EXPECT_TRUE(contains_set(a, a2) && contains_set(a2, a));
  EXPECT_TRUE(set_equal(a, a2));
  EXPECT_TRUE(contains_set(a, Polytope::empty_set(2)));
  EXPECT_TRUE(contains_set(b, Box(VectorXd::Zero(2), VectorXd::Ones(2))));
}

GTEST_TEST(InvariantSetTest, ScalarMaxRpi) {
  // 0.5 * 1 + 0.2 <= 1, so [-1, 1] is already invariant.
  const Polytope O = max_rpi(MatrixXd::Constant(1, 1, 0.5), interval(-1, 1),
                             MatrixXd::Constant(1, 1, 0.2), Box::unit(1));
  EXPECT_TRUE(set_equal(O, interval(-1, 1)));
  const Polytope I = max_rpi(MatrixXd::Identity(2, 2), box(Eigen::Vector2d(1, 1)),
                             MatrixXd::Zero(2, 2), Box::unit(2));
  EXPECT_TRUE(set_equal(I, box(Eigen::Vector2d(1, 1))));
}

GTEST_TEST(InvariantSetTest, ScalarMinRpi) {
  // Limit set of x+ = 0.5 x + 0.3 w is [-0.6, 0.6].
  const double eps = 1e-2;
  const Polytope O = min_rpi_approx(MatrixXd::Constant(1, 1, 0.5), MatrixXd::Constant(1, 1, 0.3),
                                    Box::unit(1), eps);
  const double hi = support(O, VectorXd::Ones(1));
  EXPECT_GE(hi, 0.6 - 1e-12);
  EXPECT_LE(hi, 0.6 * (1 + eps) + 1e-12);
  const Polytope dead = min_rpi_approx(MatrixXd::Zero(1, 1), MatrixXd::Constant(1, 1, 0.3),
                                       Box::unit(1), eps);
  EXPECT_NEAR(support(dead, VectorXd::Ones(1)), 0.3 * (1 + eps), 1e-12);
  EXPECT_THROW(min_rpi_approx(MatrixXd::Constant(1, 1, 1.1), MatrixXd::Ones(1, 1), Box::unit(1)),
               Error);
}

GTEST_TEST(InvariantSetTest, ScalarMaxRci) {
  // x+ = 2x + u + 0.3w, |u| <= 1, |x| <= 1. Hand iteration on [-r, r]:
  // some u in [-1, 1] gives |2x + u| <= r - 0.3 iff |x| <= (r + 0.7) / 2.
  double r = 1.0;
  for (int i = 0; i < 200; ++i) r = std::min(1.0, (r + 0.7) / 2.0);
  const Polytope R = max_rci(MatrixXd::Constant(1, 1, 2.0), MatrixXd::Ones(1, 1), interval(-1, 1),
                             interval(-1, 1), MatrixXd::Constant(1, 1, 0.3), Box::unit(1));
  EXPECT_NEAR(support(R, VectorXd::Ones(1)), r, 1e-7);
  EXPECT_NEAR(support(R, -VectorXd::Ones(1)), r, 1e-7);
  EXPECT_THROW(max_rci(MatrixXd::Identity(4, 4), MatrixXd::Identity(4, 4),
                       box(VectorXd::Ones(4)), box(VectorXd::Ones(4)), MatrixXd::Zero(4, 4),
                       Box::unit(4)),
               Error);
}

GTEST_TEST(InvariantSetTest, FullyActuatedMaxRciIsX) {
  const Polytope X = box(Eigen::Vector2d(1, 1));
  const Polytope R = max_rci(MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2),
                             box(Eigen::Vector2d(10, 10)), X, 0.1 * MatrixXd::Identity(2, 2),
                             Box::unit(2));
  EXPECT_TRUE(set_equal(R, X));
}

class DoubleIntegratorSets : public ::testing::Test {
 protected:
  void SetUp() override { p_ = test::double_integrator(); }
  SafetyProblem p_;
};

TEST_F(DoubleIntegratorSets, OmegaMaxIsRobustlyInvariant) {
  const MatrixXd A_cl = p_.A + p_.B * p_.K_f;
  const Polytope& O = p_.terminal;
  ASSERT_FALSE(O.is_empty());
  EXPECT_TRUE(contains_set(pre_set(O, A_cl, p_.B_w, Box::unit(2)), O));
  for (const auto& x : sample_in(O, 1000, 9)) {
    EXPECT_TRUE(p_.X.contains(x, 1e-9));
    EXPECT_TRUE(p_.U.contains(p_.K_f * x, 1e-9));
    for (const auto& w : test::cube_vertices(2))
      ASSERT_TRUE(O.contains(A_cl * x + p_.B_w * w, 1e-9));
  }
}

TEST_F(DoubleIntegratorSets, OmegaMinIsRobustlyInvariant) {
  const MatrixXd A_cl = p_.A + p_.B * p_.K_f;
  const Polytope O = min_rpi_approx(A_cl, p_.B_w, Box::unit(2), 1e-2);
  EXPECT_TRUE(contains_set(O, box_image(p_.B_w, Box::unit(2))));
  EXPECT_TRUE(contains_set(p_.terminal, O));
  for (const auto& x : sample_in(O, 1000, 4))
    for (const auto& w : test::cube_vertices(2))
      ASSERT_TRUE(O.contains(A_cl * x + p_.B_w * w, 1e-9));
}

TEST_F(DoubleIntegratorSets, MaxRciIsControlInvariant) {
  const Polytope R = max_rci(p_.A, p_.B, p_.U, p_.X, p_.B_w, Box::unit(2));
  EXPECT_TRUE(contains_set(R, p_.terminal));
  EXPECT_TRUE(contains_set(p_.X, R));
  // Feasibility LP in u: U rows and R rows at every disturbance vertex.
  const auto ws = test::cube_vertices(2);
  for (const auto& x : sample_in(R, 300, 12)) {
    const int rows = p_.U.num_rows() + R.num_rows() * static_cast<int>(ws.size());
    MatrixXd G(rows, 1);
    VectorXd h(rows);
    G.topRows(p_.U.num_rows()) = p_.U.A();
    h.head(p_.U.num_rows()) = p_.U.b();
    int r = p_.U.num_rows();
    for (const auto& w : ws) {
      G.middleRows(r, R.num_rows()) = R.A() * p_.B;
      h.segment(r, R.num_rows()) = R.b() - R.A() * (p_.A * x + p_.B_w * w) +
                                   VectorXd::Constant(R.num_rows(), 1e-9);
      r += R.num_rows();
    }
    EXPECT_EQ(solver::solve_lp(VectorXd::Zero(1), G, h).status, solver::LpStatus::kOptimal);
  }
}

}  // namespace
}  // namespace poly
}  // namespace slsf
