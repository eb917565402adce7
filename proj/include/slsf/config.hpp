#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "slsf/sls_core.hpp"
#include "slsf/solver.hpp"

namespace slsf {

/// Problem and study settings read from a YAML file. Matrices are row-major
/// nested sequences; constraint sets are either {box: [...]} (symmetric) or
/// {A: [[...]], b: [...]}.
struct ProblemConfig {
  MatrixXd A, B, B_w;
  MatrixXd X_A;
  VectorXd X_b;
  MatrixXd U_A;
  VectorXd U_b;
  VectorXd w_box;  // disturbance half widths, W = diag(w_box) B_inf
  int N = 10;
  MatrixXd Q, R;

  std::string method = "sl";
  double eps_abs = 1e-8;
  double eps_rel = 1e-6;
  int max_iter = 100000;
  std::uint64_t seed = 1;

  int grid = 50;
  int timing_samples = 2000;
  int episodes = 100;
  int steps = 50;
  double tube_eps = 1e-2;
  bool hyperbox = false;

  /// The double integrator study.
  static ProblemConfig defaults();
  bool operator==(const ProblemConfig& other) const;
};

/// Missing keys keep their defaults. Errors are ErrorCode::kConfig with a
/// "line L:" prefix.
ProblemConfig parse_config(const std::string& text);
ProblemConfig load_config(const std::string& path);
std::string serialize_config(const ProblemConfig& cfg);
/// FNV-1a of the serialized form.
std::uint64_t config_hash(const ProblemConfig& cfg);

/// Solver settings with environment overrides applied on top.
solver::Settings solver_settings(const ProblemConfig& cfg);

/// LQR terminal gain and the maximal robust invariant terminal set. Throws
/// NotStabilizable when (A, B) admits no stabilizing LQR gain.
SafetyProblem build_problem(const ProblemConfig& cfg);

}  // namespace slsf
