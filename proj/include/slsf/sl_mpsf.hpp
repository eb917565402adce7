#pragma once

#include <memory>

#include "slsf/filter.hpp"
#include "slsf/sls_core.hpp"
#include "slsf/solver.hpp"

namespace slsf {

/// Variable and row counts of the SL-MPSF program.
///
///   z        (N+1) n           nominal states
///   v        N m               nominal inputs (v_N never enters a constraint)
///   phi_x    n n_w N(N+1)/2    disturbance responses Phi_x(k, c), 1 <= c <= k <= N
///   phi_u    m n_w N(N-1)/2    disturbance responses Phi_u(k, c), 1 <= c <= k <= N-1
///   slacks   n_w N(N-1)/2 per state and input row, n_w N per terminal row
///
/// Diagonal blocks Phi_x(k, k) = B_w are kept as variables pinned by the
/// subspace equality. Rows: n + N n + n n_w N(N+1)/2 equalities; every slack
/// contributes two inequalities and every tightened row one.
struct SlMpsfCensus {
  int z = 0, v = 0, phi_x = 0, phi_u = 0;
  int slack_state = 0, slack_input = 0, slack_terminal = 0;
  int variables = 0;
  int eq_rows = 0;
  int in_rows = 0;

  static SlMpsfCensus closed_form(int n, int m, int n_w, int N, int n_x, int n_u, int n_f);
  bool operator==(const SlMpsfCensus&) const = default;
};

struct SlMpsfOptions {
  double regularization = 1e-8;
  double backoff = kConstraintBackoff;
  bool retain_responses = true;
};

class SlMpsf final : public SafetyFilter {
 public:
  explicit SlMpsf(const SafetyProblem& problem,
                  solver::Settings settings = solver::Settings::from_env(),
                  SlMpsfOptions options = {});
  ~SlMpsf() override;
  SlMpsf(SlMpsf&&) noexcept;
  SlMpsf& operator=(SlMpsf&&) noexcept;

  std::string name() const override { return "sl"; }

  /// Filter law with the runtime fallback: when the program is infeasible,
  /// replay the last feasible plan through its feedback for up to N steps,
  /// otherwise saturate u_L into U. Fallback steps are flagged backup_engaged.
  FilterResult filter(const VectorXd& x, const VectorXd& u_L) override;
  /// One solve of the program; no fallback and no stored state change.
  FilterResult filter_step(const VectorXd& x, const VectorXd& u_L);
  bool is_feasible(const VectorXd& x) override;
  /// Feasibility of the program with v_0 pinned to v0.
  bool is_feasible_with_input(const VectorXd& x, const VectorXd& v0);
  void reset() override;

  /// Program data for (x, u_L); the structure is shared across calls.
  const solver::ConicProgram& assemble(const VectorXd& x, const VectorXd& u_L);
  const SlMpsfCensus& census() const;
  const SafetyProblem& problem() const;

  /// Decodes the response blocks of a solution vector.
  SystemResponses decode_responses(const VectorXd& y) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace slsf
