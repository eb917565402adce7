#pragma once

#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "slsf/sls_core.hpp"
#include "slsf/solver.hpp"

namespace slsf {

struct FilterResult {
  VectorXd u_applied;
  VectorXd u_learned;
  double intervention = 0.0;  // ||u_applied - u_learned||_2
  bool feasible = false;
  MatrixXd z_plan;  // (N+1) x n nominal states
  MatrixXd v_plan;  // N x m nominal inputs
  std::optional<SystemResponses> responses;
  bool backup_engaged = false;

  solver::Status status = solver::Status::kMaxIter;
  int iterations = 0;
  double solve_time_s = 0.0;
  double total_time_s = 0.0;  // including program updates
};

/// Common interface of all safety filters. Filters may keep state between
/// calls (warm starts, backup phase); reset() clears it.
class SafetyFilter {
 public:
  virtual ~SafetyFilter() = default;
  virtual std::string name() const = 0;
  virtual FilterResult filter(const VectorXd& x, const VectorXd& u_L) = 0;
  /// Membership of x in the filter's safe set.
  virtual bool is_feasible(const VectorXd& x) = 0;
  virtual void reset() {}
};

/// Base back-off of the predicted constraint rows of the MPSF programs.
/// ADMM solutions are feasible to about 1e-5, so the true constraints hold
/// with margin.
inline constexpr double kConstraintBackoff = 1e-4;

/// Back-off of the stage-k state and input rows (the stage-0 state rows of
/// the measured state are never backed off). It grows by backoff per stage,
/// so a plan shifted by one step satisfies every row of the next program with
/// margin backoff and recursive feasibility survives solver inaccuracy.
inline double stage_backoff(double backoff, int k) { return backoff * (1 + k); }

/// Largest subset of the terminal set T on which K keeps
/// x+ = (A + B K) x + B_w w + e inside itself for w in the unit box and
/// |e|_inf <= backoff, with states in X and inputs K x in U tightened by
/// stage_backoff(backoff, N). The MPSF programs impose it on z_N without
/// further back-off. An empty or zero B_w gives the nominal case; backoff 0
/// returns T.
poly::Polytope backed_off_terminal(const poly::Polytope& T, const MatrixXd& A, const MatrixXd& B,
                                   const MatrixXd& K, const poly::Polytope& X,
                                   const poly::Polytope& U, const MatrixXd& B_w, double backoff,
                                   int N);

/// Learned input u_L(x, t).
using Policy = std::function<VectorXd(const VectorXd& x, int t)>;
/// Disturbance w(t) in the unit box of dimension n_w.
using DisturbanceSource = std::function<VectorXd(const VectorXd& x, int t)>;

/// Projection of u onto the polytope U (small QP).
VectorXd project_input(const poly::Polytope& U, const VectorXd& u);

}  // namespace slsf
