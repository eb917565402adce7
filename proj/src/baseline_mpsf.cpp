#include "slsf/baseline_mpsf.hpp"

#include <chrono>
#include <cmath>

#include "qp_core.hpp"
#include "slsf/error.hpp"
#include "slsf/program_builder.hpp"

namespace slsf {

using solver::LinExpr;
using solver::ProgramBuilder;

namespace {

constexpr double kRegularization = 1e-8;

MatrixXd dare_step(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q, const MatrixXd& R,
                   const MatrixXd& P) {
  const MatrixXd S = R + B.transpose() * P * B;
  const MatrixXd BtPA = B.transpose() * P * A;
  return Q + A.transpose() * P * A - BtPA.transpose() * S.ldlt().solve(BtPA);
}

// Row expression a . y_{offset..offset+len}.
LinExpr row_expr(const Eigen::RowVectorXd& a, int offset) {
  LinExpr e;
  for (int j = 0; j < a.size(); ++j)
    if (a(j) != 0.0) e.terms.emplace_back(offset + j, a(j));
  return e;
}

// Nominal dynamics z_{k+1} = A z_k + B v_k as equality rows.
void add_dynamics(ProgramBuilder& b, const MatrixXd& A, const MatrixXd& B, int z, int v, int N) {
  const int n = static_cast<int>(A.rows());
  const int m = static_cast<int>(B.cols());
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < n; ++i) {
      LinExpr e = LinExpr::var(z + (k + 1) * n + i);
      e -= row_expr(A.row(i), z + k * n);
      e -= row_expr(B.row(i), v + k * m);
      b.add_eq(e);
    }
  }
}

void add_polytope_rows(ProgramBuilder& b, const poly::Polytope& P, int offset,
                       double backoff = kConstraintBackoff) {
  for (int i = 0; i < P.num_rows(); ++i)
    b.add_le(row_expr(P.A().row(i), offset) - (P.b()(i) - backoff));
}

void fill_plan(FilterResult& r, const VectorXd& y, int z, int v, int n, int m, int N) {
  r.z_plan.resize(N + 1, n);
  r.v_plan.resize(N, m);
  for (int k = 0; k <= N; ++k) r.z_plan.row(k) = y.segment(z + k * n, n).transpose();
  for (int k = 0; k < N; ++k) r.v_plan.row(k) = y.segment(v + k * m, m).transpose();
}

}  // namespace

MatrixXd lqr(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q, const MatrixXd& R,
             MatrixXd* P_out, int max_iter, double tol) {
  const int n = static_cast<int>(A.rows());
  SLSF_THROW_UNLESS(A.cols() == n && B.rows() == n && Q.rows() == n && Q.cols() == n &&
                        R.rows() == B.cols() && R.cols() == B.cols(),
                    ErrorCode::kDimensionMismatch, "lqr sizes");
  MatrixXd P = Q;
  for (int it = 0; it < max_iter; ++it) {
    MatrixXd next = dare_step(A, B, Q, R, P);
    next = 0.5 * (next + next.transpose());
    SLSF_THROW_UNLESS(next.allFinite() && next.cwiseAbs().maxCoeff() < 1e12,
                      ErrorCode::kNotStabilizable, "Riccati iteration diverged");
    const double diff = (next - P).cwiseAbs().maxCoeff();
    P = std::move(next);
    if (diff <= tol * std::max(1.0, P.cwiseAbs().maxCoeff())) {
      const MatrixXd S = R + B.transpose() * P * B;
      const MatrixXd K = -S.ldlt().solve(B.transpose() * P * A);
      const double rho = (A + B * K).eigenvalues().cwiseAbs().maxCoeff();
      SLSF_THROW_UNLESS(rho < 1.0, ErrorCode::kNotStabilizable,
                        "Riccati fixed point does not stabilize");
      if (P_out) *P_out = P;
      return K;
    }
  }
  throw Error(ErrorCode::kNotStabilizable, "Riccati iteration did not converge");
}

double dare_residual(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q, const MatrixXd& R,
                     const MatrixXd& P) {
  return (dare_step(A, B, Q, R, P) - P).cwiseAbs().maxCoeff() /
         std::max(1.0, P.cwiseAbs().maxCoeff());
}

poly::Polytope backed_off_terminal(const poly::Polytope& T, const MatrixXd& A, const MatrixXd& B,
                                   const MatrixXd& K, const poly::Polytope& X,
                                   const poly::Polytope& U, const MatrixXd& B_w, double backoff,
                                   int N) {
  if (backoff <= 0.0) return T;
  const int n = T.dim();
  const double d = stage_backoff(backoff, N);
  MatrixXd J(T.num_rows() + X.num_rows() + U.num_rows(), n);
  VectorXd jb(J.rows());
  J << T.A(), X.A(), U.A() * K;
  jb << T.b(), X.b().array() - d, U.b().array() - d;
  const int n_w = B_w.isZero() ? 0 : static_cast<int>(B_w.cols());
  MatrixXd E(n, n_w + n);
  if (n_w > 0) E.leftCols(n_w) = B_w;
  E.rightCols(n) = backoff * MatrixXd::Identity(n, n);
  return poly::max_rpi(A + B * K, poly::Polytope(J, jb), E, poly::Box::unit(n_w + n));
}

VectorXd project_input(const poly::Polytope& U, const VectorXd& u) {
  const int m = U.dim();
  SLSF_THROW_UNLESS(u.size() == m, ErrorCode::kDimensionMismatch, "input size");
  if (U.contains(u, 0.0)) return u;
  const auto prog = solver::make_program(2.0 * MatrixXd::Identity(m, m), -2.0 * u,
                                         MatrixXd(0, m), VectorXd(0), U.A(), U.b());
  const auto sol = solver::solve(prog);
  SLSF_THROW_UNLESS(sol.status == solver::Status::kOptimal, ErrorCode::kSolverFailure,
                    "input projection failed");
  return sol.x;
}

// ---------------------------------------------------------------------------
// Nominal MPSF

struct NominalFilter::Impl {
  SafetyProblem problem;
  detail::QpCore core;
  int z = 0, v = 0;
  VectorXd b_eq, b_in;

  Impl(const SafetyProblem& p, const solver::Settings& s) : problem(p) {
    const int n = p.n(), m = p.m(), N = p.N;
    ProgramBuilder b;
    z = b.add_variables((N + 1) * n);
    v = b.add_variables(N * m);
    for (int i = 0; i < n; ++i) b.add_eq(LinExpr::var(z + i));  // z_0 = x
    add_dynamics(b, p.A, p.B, z, v, N);
    for (int k = 0; k < N; ++k) {
      add_polytope_rows(b, p.X, z + k * n, k == 0 ? 0.0 : stage_backoff(kConstraintBackoff, k));
      add_polytope_rows(b, p.U, v + k * m, stage_backoff(kConstraintBackoff, k));
    }
    const poly::Polytope T = backed_off_terminal(p.terminal, p.A, p.B, p.K_f, p.X, p.U,
                                                 MatrixXd(n, 0), kConstraintBackoff, N);
    add_polytope_rows(b, T, z + N * n, 0.0);
    for (int i = m; i < N * m; ++i) b.add_square(LinExpr::var(v + i), kRegularization);
    std::vector<LinExpr> cost;
    for (int i = 0; i < m; ++i) cost.push_back(LinExpr::var(v + i));
    core.init(b, cost, s);
    b_eq = core.program().b_eq;
    b_in = core.program().b_in;
  }

  FilterResult run(const VectorXd& x, const VectorXd& u_L) {
    const auto t0 = std::chrono::steady_clock::now();
    const int n = problem.n(), m = problem.m();
    SLSF_THROW_UNLESS(x.size() == n && u_L.size() == m, ErrorCode::kDimensionMismatch,
                      "state/input size");
    b_eq.head(n) = x;
    core.set_data(b_eq, b_in, -u_L);
    const auto sol = core.solve();
    FilterResult r;
    r.u_learned = u_L;
    r.status = sol.status;
    r.iterations = sol.iterations;
    r.solve_time_s = sol.solve_time_s;
    r.feasible = sol.status == solver::Status::kOptimal;
    if (r.feasible) {
      r.u_applied = sol.x.segment(v, m);
      r.intervention = (r.u_applied - u_L).norm();
      fill_plan(r, sol.x, z, v, n, m, problem.N);
    } else {
      r.u_applied = project_input(problem.U, u_L);
      r.intervention = (r.u_applied - u_L).norm();
      r.backup_engaged = true;
    }
    r.total_time_s = detail::seconds_since(t0);
    return r;
  }
};

NominalFilter::NominalFilter(const SafetyProblem& problem, solver::Settings settings)
    : impl_(std::make_unique<Impl>(problem, settings)) {}
NominalFilter::~NominalFilter() = default;
FilterResult NominalFilter::filter(const VectorXd& x, const VectorXd& u_L) {
  return impl_->run(x, u_L);
}
bool NominalFilter::is_feasible(const VectorXd& x) {
  return impl_->run(x, VectorXd::Zero(impl_->problem.m())).feasible;
}
void NominalFilter::reset() { impl_->core.reset(); }

// ---------------------------------------------------------------------------
// Tube MPSF

void TubeConfig::validate(const SafetyProblem& problem) const {
  const int n = problem.n();
  SLSF_THROW_UNLESS(K.rows() == problem.m() && K.cols() == n, ErrorCode::kDimensionMismatch,
                    "tube gain size");
  const MatrixXd A_cl = problem.A + problem.B * K;
  SLSF_THROW_UNLESS(
      poly::contains_set(poly::pre_set(tube, A_cl, problem.B_w, problem.disturbance_box()), tube,
                         1e-7),
      ErrorCode::kInvalidArgument, "tube is not robustly invariant");
  SLSF_THROW_UNLESS(!X_tight.is_empty() && !U_tight.is_empty() && !terminal.is_empty(),
                    ErrorCode::kInvalidArgument, "tightened sets are empty");
  SLSF_THROW_UNLESS(poly::contains_set(problem.X, X_tight) && poly::contains_set(problem.U, U_tight),
                    ErrorCode::kInvalidArgument, "tightened sets exceed the constraints");
}

TubeConfig make_tube_config(const SafetyProblem& problem, const MatrixXd& K, double eps) {
  TubeConfig cfg;
  cfg.K = K;
  const MatrixXd A_cl = problem.A + problem.B * K;
  cfg.tube = poly::min_rpi_approx(A_cl, problem.B_w, problem.disturbance_box(), eps);
  cfg.X_tight = poly::pontryagin_diff(problem.X, cfg.tube).remove_redundant();
  cfg.U_tight = poly::pontryagin_diff(problem.U, cfg.tube, K).remove_redundant();
  SLSF_THROW_UNLESS(!cfg.X_tight.is_empty() && !cfg.U_tight.is_empty(), ErrorCode::kEmpty,
                    "tube tightening leaves no admissible nominal set");
  const int n = problem.n();
  MatrixXd J(cfg.X_tight.num_rows() + cfg.U_tight.num_rows(), n);
  VectorXd jb(J.rows());
  J << cfg.X_tight.A(), cfg.U_tight.A() * K;
  jb << cfg.X_tight.b(), cfg.U_tight.b();
  cfg.terminal = poly::max_pi(A_cl, poly::Polytope(J, jb));
  return cfg;
}

struct TubeFilter::Impl {
  SafetyProblem problem;
  TubeConfig cfg;
  detail::QpCore core;
  int z = 0, v = 0;
  VectorXd b_eq, b_in;

  Impl(const SafetyProblem& p, TubeConfig c, const solver::Settings& s)
      : problem(p), cfg(std::move(c)) {
    const int n = p.n(), m = p.m(), N = p.N;
    ProgramBuilder b;
    z = b.add_variables((N + 1) * n);
    v = b.add_variables(N * m);
    // -A_t z_0 <= b_t - A_t x; the data-dependent rows come first.
    for (int i = 0; i < cfg.tube.num_rows(); ++i)
      b.add_le(-row_expr(cfg.tube.A().row(i), z) - (cfg.tube.b()(i) - kConstraintBackoff));
    add_dynamics(b, p.A, p.B, z, v, N);
    for (int k = 0; k < N; ++k) {
      add_polytope_rows(b, cfg.X_tight, z + k * n, stage_backoff(kConstraintBackoff, k));
      add_polytope_rows(b, cfg.U_tight, v + k * m, stage_backoff(kConstraintBackoff, k));
    }
    const poly::Polytope T = backed_off_terminal(cfg.terminal, p.A, p.B, cfg.K, cfg.X_tight,
                                                 cfg.U_tight, MatrixXd(n, 0), kConstraintBackoff, N);
    add_polytope_rows(b, T, z + N * n, 0.0);
    for (int i = m; i < N * m; ++i) b.add_square(LinExpr::var(v + i), kRegularization);
    for (int i = 0; i < n; ++i) b.add_square(LinExpr::var(z + i), kRegularization);
    std::vector<LinExpr> cost;
    for (int i = 0; i < m; ++i) {
      LinExpr e = LinExpr::var(v + i);
      e -= row_expr(cfg.K.row(i), z);
      cost.push_back(e);
    }
    core.init(b, cost, s);
    b_eq = core.program().b_eq;
    b_in = core.program().b_in;
  }

  FilterResult run(const VectorXd& x, const VectorXd& u_L) {
    const auto t0 = std::chrono::steady_clock::now();
    const int n = problem.n(), m = problem.m();
    SLSF_THROW_UNLESS(x.size() == n && u_L.size() == m, ErrorCode::kDimensionMismatch,
                      "state/input size");
    b_in.head(cfg.tube.num_rows()) =
        (cfg.tube.b().array() - kConstraintBackoff).matrix() - cfg.tube.A() * x;
    core.set_data(b_eq, b_in, cfg.K * x - u_L);
    const auto sol = core.solve();
    FilterResult r;
    r.u_learned = u_L;
    r.status = sol.status;
    r.iterations = sol.iterations;
    r.solve_time_s = sol.solve_time_s;
    r.feasible = sol.status == solver::Status::kOptimal;
    if (r.feasible) {
      const VectorXd z0 = sol.x.segment(z, n);
      r.u_applied = sol.x.segment(v, m) + cfg.K * (x - z0);
      r.intervention = (r.u_applied - u_L).norm();
      fill_plan(r, sol.x, z, v, n, m, problem.N);
    } else {
      r.u_applied = project_input(problem.U, u_L);
      r.intervention = (r.u_applied - u_L).norm();
      r.backup_engaged = true;
    }
    r.total_time_s = detail::seconds_since(t0);
    return r;
  }
};

TubeFilter::TubeFilter(const SafetyProblem& problem, TubeConfig cfg, solver::Settings settings)
    : impl_(std::make_unique<Impl>(problem, std::move(cfg), settings)) {}
TubeFilter::~TubeFilter() = default;
FilterResult TubeFilter::filter(const VectorXd& x, const VectorXd& u_L) {
  return impl_->run(x, u_L);
}
bool TubeFilter::is_feasible(const VectorXd& x) {
  return impl_->run(x, VectorXd::Zero(impl_->problem.m())).feasible;
}
void TubeFilter::reset() { impl_->core.reset(); }
const TubeConfig& TubeFilter::config() const { return impl_->cfg; }

}  // namespace slsf
