#pragma once

#include <algorithm>
#include <memory>
#include <vector>

#include "slsf/filter.hpp"
#include "slsf/polytope.hpp"
#include "slsf/sls_core.hpp"
#include "slsf/solver.hpp"

namespace slsf {

/// Box {z_star_0} + diag(alpha) B_inf with a stored periodic backup law.
struct ExplicitSafeSet {
  double alpha = 0.0;   // min over axes; the scalar radius unless hyperbox
  VectorXd alpha_axes;  // per-axis half widths
  MatrixXd z_star;      // (N+1) x n
  MatrixXd v_star;      // N x m
  BlockLowerTriangular K_star;  // m x n blocks, first column n wide
  SystemResponses responses;    // first column scaled by diag(alpha_axes)

  int horizon() const { return static_cast<int>(v_star.rows()); }
  int n() const { return static_cast<int>(z_star.cols()); }
  int m() const { return static_cast<int>(v_star.cols()); }
  VectorXd center() const { return z_star.row(0).transpose(); }
  poly::Box box() const { return {center(), alpha_axes}; }
  bool contains(const VectorXd& x, double tol = 0.0) const;
};

struct ExplicitOptions {
  bool hyperbox = false;
  /// Margin subtracted from every row of the LP; the stored set is then
  /// re-verified exactly with responses recomputed from K_star.
  double margin = 1e-7;
  double alpha_tol = 1e-9;
  solver::Settings settings = [] {
    solver::Settings s = solver::Settings::from_env();
    s.eps_abs = std::min(s.eps_abs, 1e-9);
    s.eps_rel = std::min(s.eps_rel, 1e-9);
    s.max_iter = std::max(s.max_iter, 400000);
    return s;
  }();
};

/// Largest box returning to itself within N steps under an affine SLS
/// backup, by a single LP. Zero columns of B_w are dropped first, so the
/// stored responses may have fewer disturbance columns. Throws Infeasible
/// when no box exists.
ExplicitSafeSet synthesize(const SafetyProblem& problem, const ExplicitOptions& options = {});

/// Rows of the stored set evaluated exactly: minimum slack of the tightened
/// state/input rows and of the return rows (negative means violated).
struct ExplicitCertificate {
  double state_slack = 0.0;
  double input_slack = 0.0;
  double return_slack = 0.0;
  double min() const { return std::min({state_slack, input_slack, return_slack}); }
};
ExplicitCertificate certify(const SafetyProblem& problem, const ExplicitSafeSet& S);

/// u_L in U and {A x + B u_L} + B_w W inside the box.
bool check_learned_input(const VectorXd& x, const VectorXd& u_L, const ExplicitSafeSet& S,
                         const SafetyProblem& problem);

struct BackupState {
  int j = 0;
  bool engaged = false;
  std::vector<VectorXd> history;  // states since engagement, at most N
};

/// u = v_j + sum_{i<=j} K(j, i) (history[i] - z_i). Throws HistoryInconsistent
/// unless engaged with j + 1 recorded states.
VectorXd backup_input(const BackupState& bs, const ExplicitSafeSet& S);

struct Algorithm1Trace {
  MatrixXd x;  // (T+1) x n
  MatrixXd u;  // T x m
  std::vector<int> phase;      // j used at each step, -1 when u_L was applied
  std::vector<bool> accepted;  // learned input applied
  int interventions = 0;
  int state_violations = 0;
  int input_violations = 0;
};

/// Closed loop of the explicit filter from x0 in the safe box. Throws
/// InitialStateOutsideSafeSet.
Algorithm1Trace run_algorithm1(const SafetyProblem& problem, const ExplicitSafeSet& S,
                               const VectorXd& x0, const Policy& learned,
                               const DisturbanceSource& disturbance, int T);

/// Stateful filter form of the same runtime.
class ExplicitFilter final : public SafetyFilter {
 public:
  ExplicitFilter(const SafetyProblem& problem, ExplicitSafeSet S);
  std::string name() const override { return "explicit"; }
  FilterResult filter(const VectorXd& x, const VectorXd& u_L) override;
  bool is_feasible(const VectorXd& x) override { return S_.contains(x); }
  void reset() override { state_ = {}; }

  const BackupState& state() const { return state_; }
  const ExplicitSafeSet& safe_set() const { return S_; }

 private:
  SafetyProblem problem_;
  ExplicitSafeSet S_;
  BackupState state_;
};

/// Convex hull of the stage reachable sets z_k + Phi_x^k B_inf, k < N.
/// Throws DimensionTooLarge for n > 3.
poly::Polytope rci_hull(const ExplicitSafeSet& S);

/// min ||u - u_L||^2 over u in U with A x + B u + B_w W inside C.
/// Throws Infeasible when no such input exists.
VectorXd rci_filter(const VectorXd& x, const VectorXd& u_L, const poly::Polytope& C,
                    const SafetyProblem& problem);

class RciFilter final : public SafetyFilter {
 public:
  RciFilter(const SafetyProblem& problem, poly::Polytope C,
            solver::Settings settings = solver::Settings::from_env());
  ~RciFilter() override;
  std::string name() const override { return "rci"; }
  /// Saturates u_L into U when the program is infeasible (flagged backup_engaged).
  FilterResult filter(const VectorXd& x, const VectorXd& u_L) override;
  bool is_feasible(const VectorXd& x) override;
  void reset() override;
  const poly::Polytope& set() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace slsf
