#include "slsf/io.hpp"

#include <cstdio>
#include <random>

#include <gtest/gtest.h>

#include "slsf/error.hpp"
#include "slsf/explicit_filter.hpp"
#include "test_util.hpp"

namespace slsf {
namespace {

GTEST_TEST(IoTest, MatrixRoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  const MatrixXd M = MatrixXd::NullaryExpr(3, 4, [&] { return g(rng) / 3.0; });
  const io::Json j = io::to_json(M);
  EXPECT_EQ(io::matrix_from_json(io::Json::parse(j.dump())), M);
  const VectorXd v = M.col(0);
  EXPECT_EQ(io::vector_from_json(io::Json::parse(io::vector_to_json(v).dump())), v);
  EXPECT_EQ(io::matrix_from_json(io::to_json(MatrixXd(0, 0))).size(), 0);
}

GTEST_TEST(IoTest, PolytopeAndBox) {
  const poly::Polytope P = poly::Box(Eigen::Vector2d(0.1, -0.2), Eigen::Vector2d(1.0 / 3, 2)).to_polytope();
  const poly::Polytope Q = io::polytope_from_json(io::to_json(P));
  EXPECT_EQ(Q.A(), P.A());
  EXPECT_EQ(Q.b(), P.b());
  EXPECT_EQ(Q.dim(), 2);
  const poly::Box B(Eigen::Vector2d(0.1, -0.2), Eigen::Vector2d(1.0 / 3, 2));
  const poly::Box C = io::box_from_json(io::to_json(B));
  EXPECT_EQ(C.center, B.center);
  EXPECT_EQ(C.half_widths, B.half_widths);
  EXPECT_THROW(io::polytope_from_json(io::Json::parse(R"({"b": [1]})")), Error);
}

GTEST_TEST(IoTest, SafeSetFileRoundTrip) {
  const SafetyProblem p = test::double_integrator();
  const ExplicitSafeSet S = synthesize(p);
  const std::string path = ::testing::TempDir() + "slsf_io_safe_set.json";
  io::write_json(path, io::to_json(S));
  const ExplicitSafeSet T = io::safe_set_from_json(io::read_json(path));
  std::remove(path.c_str());
  EXPECT_EQ(T.alpha, S.alpha);
  EXPECT_EQ(T.alpha_axes, S.alpha_axes);
  EXPECT_EQ(T.z_star, S.z_star);
  EXPECT_EQ(T.v_star, S.v_star);
  EXPECT_EQ(T.K_star.dense(), S.K_star.dense());
  EXPECT_EQ(T.responses.Phi_x.dense(), S.responses.Phi_x.dense());
  EXPECT_EQ(T.responses.Phi_u.dense(), S.responses.Phi_u.dense());
  EXPECT_EQ(T.K_star.horizon(), S.K_star.horizon());
  EXPECT_EQ(certify(p, T).min(), certify(p, S).min());
}

GTEST_TEST(IoTest, MissingFileAndBadJson) {
  try {
    io::read_json("/nonexistent/slsf.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
  }
  const std::string path = ::testing::TempDir() + "slsf_io_bad.json";
  io::write_text(path, "{not json");
  EXPECT_THROW(io::read_json(path), Error);
  std::remove(path.c_str());
}

}  // namespace
}  // namespace slsf
