#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string_view>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace slsf::solver {

using SpMat = Eigen::SparseMatrix<double>;

/// Convex program
///   min  1/2 x'Hx + f'x
///   s.t. A_eq x  = b_eq
///        A_in x <= b_in
/// H is stored in full (both triangles) and must be symmetric PSD.
struct ConicProgram {
  SpMat H;
  Eigen::VectorXd f;
  SpMat A_eq;
  Eigen::VectorXd b_eq;
  SpMat A_in;
  Eigen::VectorXd b_in;

  int num_variables() const { return static_cast<int>(f.size()); }

  /// Throws DimensionMismatch / InvalidArgument on malformed data.
  void validate() const;

  double objective(const Eigen::VectorXd& x) const;
};

/// Convenience constructor from dense blocks; empty matrices mean "no rows".
ConicProgram make_program(const Eigen::MatrixXd& H, const Eigen::VectorXd& f,
                          const Eigen::MatrixXd& A_eq, const Eigen::VectorXd& b_eq,
                          const Eigen::MatrixXd& A_in, const Eigen::VectorXd& b_in);

enum class Status { kOptimal, kInfeasible, kUnbounded, kMaxIter };

std::string_view to_string(Status status);

struct Settings {
  double eps_abs = 1e-8;
  double eps_rel = 1e-6;
  int max_iter = 100000;

  double rho = 0.1;
  double sigma = 1e-6;
  double alpha = 1.6;
  bool adaptive_rho = true;
  double adaptive_rho_tolerance = 5.0;
  int adaptive_rho_interval = 50;  // evaluated on check iterations only
  int check_interval = 10;
  int scaling_iter = 10;

  bool polish = true;
  double polish_delta = 1e-9;
  int polish_refine_iter = 5;
  int polish_active_set_passes = 8;
  // Proximal weight toward the ADMM iterate in the polish system (scaled
  // units); keeps directions with negligible curvature near the iterate.
  double polish_prox = 1e-6;

  double eps_prim_inf = 1e-7;
  double eps_dual_inf = 1e-7;
  // Consecutive checks a certificate must pass before it is reported.
  int infeasibility_confirmations = 2;
  // Iterate-norm divergence rule for infeasibility.
  int divergence_min_iter = 1000;
  double divergence_threshold = 1e6;

  /// Overrides from SLSF_EPS_ABS, SLSF_EPS_REL and SLSF_MAX_ITER when set.
  static Settings from_env(Settings base);
  static Settings from_env();
};

struct Solution {
  Eigen::VectorXd x;
  // Multipliers with H x + f + A_eq' y_eq + A_in' y_in = 0, y_in >= 0.
  Eigen::VectorXd y_eq;
  Eigen::VectorXd y_in;
  Status status = Status::kMaxIter;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double objective = 0.0;
  int iterations = 0;
  double solve_time_s = 0.0;
  bool polished = false;
};

/// Dense-data ADMM (operator splitting) QP solver with Ruiz equilibration,
/// adaptive step size, infeasibility certificates and active-set polishing.
///
/// The constraint matrices and H are fixed at construction; linear cost and
/// right-hand sides can be updated between solves, which reuses the
/// equilibration and the KKT factorization. The previous primal/dual iterate
/// is reused as a warm start.
class AdmmSolver {
 public:
  explicit AdmmSolver(const ConicProgram& program, Settings settings = {});
  ~AdmmSolver();
  AdmmSolver(AdmmSolver&&) noexcept;
  AdmmSolver& operator=(AdmmSolver&&) noexcept;
  AdmmSolver(const AdmmSolver&) = delete;
  AdmmSolver& operator=(const AdmmSolver&) = delete;

  void update_linear_cost(const Eigen::VectorXd& f);
  void update_rhs(const Eigen::VectorXd& b_eq, const Eigen::VectorXd& b_in);
  void warm_start(const Eigen::VectorXd& x);
  void cold_start();

  Solution solve();

  const Settings& settings() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Solution solve(const ConicProgram& program, const Settings& settings = {});

/// Abstract backend so that external solvers can be adapted.
class QpBackend {
 public:
  virtual ~QpBackend() = default;
  virtual Solution solve(const ConicProgram& program, const Settings& settings) = 0;
};

class AdmmBackend final : public QpBackend {
 public:
  Solution solve(const ConicProgram& program, const Settings& settings) override {
    return solver::solve(program, settings);
  }
};

struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double complementarity = 0.0;
  double dual_sign = 0.0;  // magnitude of negative inequality multipliers
};

KktResiduals kkt_residuals(const ConicProgram& program, const Solution& solution);

/// Plain-text sparse triplet dump ("section row col value" lines).
void write_triplets(std::ostream& os, const ConicProgram& program);

// ---------------------------------------------------------------------------
// Exact dense simplex for the small LPs of set computations.

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
};

/// min c'x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x free.
/// Two-phase tableau simplex; Bland's rule after degenerate stalls.
LpResult solve_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& A_ub,
                  const Eigen::VectorXd& b_ub,
                  const Eigen::MatrixXd& A_eq = Eigen::MatrixXd(),
                  const Eigen::VectorXd& b_eq = Eigen::VectorXd());

}  // namespace slsf::solver
