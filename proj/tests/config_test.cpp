#include "slsf/config.hpp"

#include <cstdlib>

#include <gtest/gtest.h>

#include "slsf/error.hpp"
#include "test_util.hpp"

namespace slsf {
namespace {

ErrorCode code_of(const std::function<void()>& fn, std::string* what = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (what) *what = e.what();
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

GTEST_TEST(ConfigTest, DefaultsDescribeDoubleIntegrator) {
  const ProblemConfig cfg = ProblemConfig::defaults();
  EXPECT_EQ(cfg.A, (MatrixXd(2, 2) << 1, 1, 0, 1).finished());
  EXPECT_EQ(cfg.B, (MatrixXd(2, 1) << 0.5, 1).finished());
  EXPECT_EQ(cfg.B_w, 0.3 * MatrixXd::Identity(2, 2));
  EXPECT_EQ(cfg.N, 10);
  EXPECT_EQ(cfg.R(0, 0), 100.0);
  const SafetyProblem p = build_problem(cfg);
  EXPECT_EQ(p.terminal.num_rows(), 26);
  EXPECT_NO_THROW(p.validate(true));
}

GTEST_TEST(ConfigTest, EmptyDocumentKeepsDefaults) {
  EXPECT_EQ(parse_config(""), ProblemConfig::defaults());
  EXPECT_EQ(parse_config("horizon: 10\n"), ProblemConfig::defaults());
}

GTEST_TEST(ConfigTest, SerializeRoundTrip) {
  ProblemConfig cfg = ProblemConfig::defaults();
  cfg.N = 7;
  cfg.method = "tube";
  cfg.B_w(0, 1) = 0.1 / 3.0;
  cfg.eps_rel = 1.234567890123e-7;
  cfg.seed = 18446744073709551557ull;
  cfg.hyperbox = true;
  const std::string text = serialize_config(cfg);
  const ProblemConfig back = parse_config(text);
  EXPECT_EQ(back, cfg);
  EXPECT_EQ(serialize_config(back), text);
  EXPECT_EQ(config_hash(back), config_hash(cfg));
  EXPECT_NE(config_hash(cfg), config_hash(ProblemConfig::defaults()));
}

GTEST_TEST(ConfigTest, BoxConstraintForm) {
  const ProblemConfig cfg = parse_config(
      "constraints:\n"
      "  state: {box: [6, 4]}\n"
      "  input: {box: [2.5]}\n");
  const SafetyProblem p = build_problem(cfg);
  EXPECT_NEAR(poly::support(p.X, Eigen::Vector2d(1, 0)), 6.0, 1e-12);
  EXPECT_NEAR(poly::support(p.X, Eigen::Vector2d(0, -1)), 4.0, 1e-12);
  EXPECT_NEAR(poly::support(p.U, -VectorXd::Ones(1)), 2.5, 1e-12);
  EXPECT_TRUE(poly::contains_set(p.X, p.terminal));
}

GTEST_TEST(ConfigTest, ErrorsCarryLineNumbers) {
  std::string what;
  EXPECT_EQ(code_of([] { parse_config("horizon: 10\nmethod: sl\nbogus: 1\n"); }, &what),
            ErrorCode::kConfig);
  EXPECT_NE(what.find("line 3"), std::string::npos) << what;
  EXPECT_NE(what.find("bogus"), std::string::npos) << what;

  EXPECT_EQ(code_of([] { parse_config("system:\n  A: [[1, 1], [0, 1]]\n  C: 1\n"); }, &what),
            ErrorCode::kConfig);
  EXPECT_NE(what.find("line 3"), std::string::npos) << what;

  EXPECT_EQ(code_of([] { parse_config("horizon: ten\n"); }, &what), ErrorCode::kConfig);
  EXPECT_NE(what.find("line 1"), std::string::npos) << what;

  EXPECT_EQ(code_of([] { parse_config("method: magic\n"); }), ErrorCode::kConfig);
  EXPECT_EQ(code_of([] { parse_config("system:\n  A: [[1, 1], [0]]\n"); }), ErrorCode::kConfig);
  EXPECT_EQ(code_of([] { parse_config("horizon: [1\n"); }), ErrorCode::kConfig);
  EXPECT_EQ(code_of([] { load_config("/nonexistent/slsf.yaml"); }), ErrorCode::kConfig);
}

GTEST_TEST(ConfigTest, UnstabilizableSystemIsRejected) {
  const ProblemConfig cfg = parse_config("system:\n  B: [[0], [0]]\n");
  EXPECT_EQ(code_of([&] { build_problem(cfg); }), ErrorCode::kNotStabilizable);
}

GTEST_TEST(ConfigTest, DimensionMismatchIsRejected) {
  std::string what;
  EXPECT_EQ(code_of([] { parse_config("system:\n  B: [[0.5], [1], [2]]\n"); }, &what),
            ErrorCode::kConfig);
  EXPECT_NE(what.find("line 2"), std::string::npos) << what;
  ProblemConfig cfg = ProblemConfig::defaults();
  cfg.B_w = MatrixXd::Identity(3, 3);
  EXPECT_EQ(code_of([&] { build_problem(cfg); }), ErrorCode::kDimensionMismatch);
}

GTEST_TEST(ConfigTest, SolverSettingsTakeEnvironmentOverrides) {
  ProblemConfig cfg = ProblemConfig::defaults();
  cfg.eps_abs = 1e-7;
  cfg.max_iter = 500;
  ::unsetenv("SLSF_EPS_ABS");
  ::unsetenv("SLSF_MAX_ITER");
  EXPECT_EQ(solver_settings(cfg).eps_abs, 1e-7);
  EXPECT_EQ(solver_settings(cfg).max_iter, 500);
  ::setenv("SLSF_MAX_ITER", "77", 1);
  EXPECT_EQ(solver_settings(cfg).max_iter, 77);
  ::unsetenv("SLSF_MAX_ITER");
}

}  // namespace
}  // namespace slsf
