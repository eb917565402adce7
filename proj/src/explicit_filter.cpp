#include "slsf/explicit_filter.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "qp_core.hpp"
#include "slsf/error.hpp"
#include "slsf/program_builder.hpp"

namespace slsf {

using solver::LinExpr;
using solver::ProgramBuilder;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LinExpr row_expr(const Eigen::RowVectorXd& a, int offset) {
  LinExpr e;
  for (int j = 0; j < a.size(); ++j)
    if (a(j) != 0.0) e.terms.emplace_back(offset + j, a(j));
  return e;
}

// Variable layout of the synthesis LP. Phi_x(0, 0) = diag(alpha) is not a
// variable; Phi_x(c, c) = B_w is a pinned variable as in the online program.
struct Layout {
  int n = 0, m = 0, n_w = 0, N = 0, n_a = 1;
  int z = 0, v = 0, a = 0, tx = 0, px = 0, tu = 0, pu = 0;

  int zi(int k, int i) const { return z + k * n + i; }
  int vi(int k, int i) const { return v + k * m + i; }
  int ai(int i) const { return a + (n_a == 1 ? 0 : i); }
  // first column, 1 <= k <= N
  int txi(int k, int i, int j) const { return tx + ((k - 1) * n + i) * n + j; }
  // 1 <= c <= k <= N
  int pxi(int k, int c, int i, int j) const {
    return px + (((k - 1) * k / 2 + (c - 1)) * n + i) * n_w + j;
  }
  // first column, 0 <= k <= N-1
  int tui(int k, int i, int j) const { return tu + (k * m + i) * n + j; }
  // 1 <= c <= k <= N-1
  int pui(int k, int c, int i, int j) const {
    return pu + (((k - 1) * k / 2 + (c - 1)) * m + i) * n_w + j;
  }
};

// Entry (i, j) of Phi_x(k, 0) as an expression.
LinExpr first_x(const Layout& L, int k, int i, int j) {
  if (k == 0) return i == j ? LinExpr::var(L.ai(i)) : LinExpr(0.0);
  return LinExpr::var(L.txi(k, i, j));
}

double row_l1(const Eigen::RowVectorXd& r) { return r.cwiseAbs().sum(); }

}  // namespace

bool ExplicitSafeSet::contains(const VectorXd& x, double tol) const {
  return x.size() == n() && ((x - center()).cwiseAbs() - alpha_axes).maxCoeff() <= tol;
}

static ExplicitSafeSet synthesize_checked(const SafetyProblem& problem,
                                          const ExplicitOptions& options) {
  const int n = problem.n(), m = problem.m(), n_w = problem.n_w(), N = problem.N;
  SLSF_THROW_UNLESS(N >= 1, ErrorCode::kInvalidArgument, "horizon must be positive");
  const auto& A = problem.A;
  const auto& B = problem.B;

  Layout L;
  L.n = n;
  L.m = m;
  L.n_w = n_w;
  L.N = N;
  L.n_a = options.hyperbox ? n : 1;
  ProgramBuilder b;
  L.z = b.add_variables((N + 1) * n);
  L.v = b.add_variables(N * m);
  L.a = b.add_variables(L.n_a);
  L.tx = b.add_variables(N * n * n);
  L.px = b.add_variables(n * n_w * N * (N + 1) / 2);
  L.tu = b.add_variables(N * m * n);
  L.pu = b.add_variables(m * n_w * N * (N - 1) / 2);
  const int num_phi = b.num_variables() - L.tx;

  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < n; ++i) {
      LinExpr e = LinExpr::var(L.zi(k + 1, i));
      e -= row_expr(A.row(i), L.zi(k, 0));
      e -= row_expr(B.row(i), L.vi(k, 0));
      b.add_eq(e);
    }
  }
  // Subspace equation, initial-condition column.
  for (int k = 1; k <= N; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        LinExpr e = LinExpr::var(L.txi(k, i, j));
        for (int l = 0; l < n; ++l)
          if (A(i, l) != 0.0) e -= A(i, l) * first_x(L, k - 1, l, j);
        for (int l = 0; l < m; ++l)
          if (B(i, l) != 0.0) e.terms.emplace_back(L.tui(k - 1, l, j), -B(i, l));
        b.add_eq(e);
      }
    }
  }
  // Disturbance columns.
  for (int k = 1; k <= N; ++k) {
    for (int c = 1; c <= k; ++c) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n_w; ++j) {
          LinExpr e = LinExpr::var(L.pxi(k, c, i, j));
          if (c < k) {
            for (int l = 0; l < n; ++l)
              if (A(i, l) != 0.0) e.terms.emplace_back(L.pxi(k - 1, c, l, j), -A(i, l));
            for (int l = 0; l < m; ++l)
              if (B(i, l) != 0.0) e.terms.emplace_back(L.pui(k - 1, c, l, j), -B(i, l));
          } else {
            e.constant = -problem.B_w(i, j);
          }
          b.add_eq(e);
        }
      }
    }
  }

  auto x_entries = [&](const Eigen::RowVectorXd& a, int k) {
    std::vector<LinExpr> out;
    for (int j = 0; j < n; ++j) {
      LinExpr e;
      for (int i = 0; i < n; ++i)
        if (a(i) != 0.0) e += a(i) * first_x(L, k, i, j);
      out.push_back(e);
    }
    for (int c = 1; c <= k; ++c) {
      for (int j = 0; j < n_w; ++j) {
        LinExpr e;
        for (int i = 0; i < n; ++i)
          if (a(i) != 0.0) e.terms.emplace_back(L.pxi(k, c, i, j), a(i));
        out.push_back(e);
      }
    }
    return out;
  };
  auto u_entries = [&](const Eigen::RowVectorXd& a, int k) {
    std::vector<LinExpr> out;
    for (int j = 0; j < n; ++j) {
      LinExpr e;
      for (int i = 0; i < m; ++i)
        if (a(i) != 0.0) e.terms.emplace_back(L.tui(k, i, j), a(i));
      out.push_back(e);
    }
    for (int c = 1; c <= k; ++c) {
      for (int j = 0; j < n_w; ++j) {
        LinExpr e;
        for (int i = 0; i < m; ++i)
          if (a(i) != 0.0) e.terms.emplace_back(L.pui(k, c, i, j), a(i));
        out.push_back(e);
      }
    }
    return out;
  };

  const double mu = options.margin;
  for (int k = 0; k < N; ++k) {
    for (int r = 0; r < problem.X.num_rows(); ++r) {
      const Eigen::RowVectorXd a = problem.X.A().row(r);
      solver::encode_l1_row(b, x_entries(a, k),
                            LinExpr(problem.X.b()(r) - mu) - row_expr(a, L.zi(k, 0)));
    }
    for (int r = 0; r < problem.U.num_rows(); ++r) {
      const Eigen::RowVectorXd a = problem.U.A().row(r);
      solver::encode_l1_row(b, u_entries(a, k),
                            LinExpr(problem.U.b()(r) - mu) - row_expr(a, L.vi(k, 0)));
    }
  }
  // Return to the box after N steps.
  for (int i = 0; i < n; ++i) {
    Eigen::RowVectorXd e_i = Eigen::RowVectorXd::Unit(n, i);
    auto entries = x_entries(e_i, N);
    entries.insert(entries.begin(), LinExpr::var(L.zi(N, i)) - LinExpr::var(L.zi(0, i)));
    solver::encode_l1_row(b, entries, LinExpr::var(L.ai(i)) - mu);
  }
  for (int i = 0; i < L.n_a; ++i) {
    b.add_le(-LinExpr::var(L.a + i));
    b.add_linear(LinExpr::var(L.a + i, -1.0));
  }
  for (int i = 0; i < num_phi; ++i) b.add_square(LinExpr::var(L.tx + i), 1e-9);
  for (int i = 0; i < N * m; ++i) b.add_square(LinExpr::var(L.v + i), 1e-9);

  const auto sol = solver::solve(b.build(), options.settings);
  SLSF_THROW_UNLESS(sol.status != solver::Status::kInfeasible, ErrorCode::kInfeasible,
                    "no safe box exists for this horizon");
  SLSF_THROW_UNLESS(sol.status == solver::Status::kOptimal, ErrorCode::kSolverFailure,
                    std::string("explicit synthesis LP: ") +
                        std::string(solver::to_string(sol.status)));
  const VectorXd& y = sol.x;

  VectorXd alpha(n);
  for (int i = 0; i < n; ++i) alpha(i) = y(L.ai(i));
  SLSF_THROW_UNLESS(alpha.minCoeff() > options.alpha_tol, ErrorCode::kInfeasible,
                    "safe box radius is not positive");

  SystemResponses lp{BlockLowerTriangular(N, n, n_w, n), BlockLowerTriangular(N, m, n_w, n)};
  lp.Phi_x.block(0, 0) = alpha.asDiagonal();
  for (int k = 0; k <= N; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (k >= 1) lp.Phi_x.block(k, 0)(i, j) = y(L.txi(k, i, j));
      }
      for (int c = 1; c <= k; ++c)
        for (int j = 0; j < n_w; ++j) lp.Phi_x.block(k, c)(i, j) = y(L.pxi(k, c, i, j));
    }
    if (k < N) {
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) lp.Phi_u.block(k, 0)(i, j) = y(L.tui(k, i, j));
        for (int c = 1; c <= k; ++c)
          for (int j = 0; j < n_w; ++j) lp.Phi_u.block(k, c)(i, j) = y(L.pui(k, c, i, j));
      }
    }
  }

  // Rebuild everything from the controller so that the stored responses
  // satisfy the subspace equation exactly.
  ExplicitSafeSet S;
  S.K_star = controller_from_responses(lp);
  const StackedSystem sys = build_stacked(problem, MatrixXd::Identity(n, n));
  SystemResponses unit = responses_from_controller(sys, S.K_star);
  S.v_star.resize(N, m);
  S.z_star.resize(N + 1, n);
  for (int k = 0; k < N; ++k) S.v_star.row(k) = y.segment(L.vi(k, 0), m).transpose();
  S.z_star.row(0) = y.segment(L.zi(0, 0), n).transpose();
  for (int k = 0; k < N; ++k)
    S.z_star.row(k + 1) = (A * S.z_star.row(k).transpose() + B * S.v_star.row(k).transpose()).transpose();

  if (!options.hyperbox) {
    // Exact largest radius for the fixed backup law.
    double hi = kInf, lo = 0.0;
    auto upper = [&](double budget, double slope) {
      if (slope > 0.0) {
        hi = std::min(hi, budget / slope);
      } else if (budget < 0.0) {
        hi = -kInf;
      }
    };
    for (int k = 0; k < N; ++k) {
      const VectorXd z_k = S.z_star.row(k).transpose();
      const VectorXd v_k = S.v_star.row(k).transpose();
      for (int r = 0; r < problem.X.num_rows(); ++r) {
        const Eigen::RowVectorXd a = problem.X.A().row(r);
        const MatrixXd row = a * unit.Phi_x.block_row(k);
        upper(problem.X.b()(r) - a.dot(z_k) - row_l1(row.rightCols(row.cols() - n)),
              row_l1(row.leftCols(n)));
      }
      for (int r = 0; r < problem.U.num_rows(); ++r) {
        const Eigen::RowVectorXd a = problem.U.A().row(r);
        const MatrixXd row = a * unit.Phi_u.block_row(k);
        upper(problem.U.b()(r) - a.dot(v_k) - row_l1(row.rightCols(row.cols() - n)),
              row_l1(row.leftCols(n)));
      }
    }
    const VectorXd dz = (S.z_star.row(N) - S.z_star.row(0)).transpose();
    for (int i = 0; i < n; ++i) {
      const Eigen::RowVectorXd row = unit.Phi_x.block_row(N).row(i);
      const double need = std::abs(dz(i)) + row_l1(row.tail(row.size() - n));
      const double gain = 1.0 - row_l1(row.head(n));
      if (gain > 0.0) {
        lo = std::max(lo, need / gain);
      } else if (need > 0.0 || gain < 0.0) {
        lo = kInf;
      }
    }
    SLSF_THROW_UNLESS(std::isfinite(hi) && hi >= lo, ErrorCode::kSolverFailure,
                      "explicit synthesis could not be certified");
    alpha.setConstant(hi * (1.0 - 1e-12));
  }
  S.alpha_axes = alpha;
  S.alpha = alpha.minCoeff();
  S.responses = unit;
  for (int k = 0; k <= N; ++k) {
    S.responses.Phi_x.block(k, 0) = unit.Phi_x.block(k, 0) * alpha.asDiagonal();
    S.responses.Phi_u.block(k, 0) = unit.Phi_u.block(k, 0) * alpha.asDiagonal();
  }
  SLSF_THROW_UNLESS(S.alpha > options.alpha_tol, ErrorCode::kInfeasible,
                    "safe box radius is not positive");
  SLSF_THROW_UNLESS(certify(problem, S).min() >= -1e-10, ErrorCode::kSolverFailure,
                    "explicit synthesis could not be certified");
  return S;
}

ExplicitSafeSet synthesize(const SafetyProblem& problem, const ExplicitOptions& options) {
  problem.validate(false);
  std::vector<int> active_w;
  for (int j = 0; j < problem.n_w(); ++j)
    if (problem.B_w.col(j).cwiseAbs().maxCoeff() > 0.0) active_w.push_back(j);
  if (static_cast<int>(active_w.size()) == problem.n_w()) return synthesize_checked(problem, options);
  SafetyProblem reduced = problem;
  reduced.B_w.resize(problem.n(), static_cast<int>(active_w.size()));
  for (std::size_t j = 0; j < active_w.size(); ++j)
    reduced.B_w.col(static_cast<int>(j)) = problem.B_w.col(active_w[j]);
  return synthesize_checked(reduced, options);
}

ExplicitCertificate certify(const SafetyProblem& problem, const ExplicitSafeSet& S) {
  const int n = S.n(), N = S.horizon();
  ExplicitCertificate c{kInf, kInf, kInf};
  const MatrixXd I = MatrixXd::Identity(n, n);
  // Responses already carry diag(alpha) in the first column.
  for (int k = 0; k < N; ++k) {
    const VectorXd z_k = S.z_star.row(k).transpose();
    const VectorXd v_k = S.v_star.row(k).transpose();
    for (int r = 0; r < problem.X.num_rows(); ++r) {
      const VectorXd a = problem.X.A().row(r).transpose();
      c.state_slack = std::min(c.state_slack, problem.X.b()(r) - a.dot(z_k) -
                                                  tighten_row(a, S.responses, k, I));
    }
    for (int r = 0; r < problem.U.num_rows(); ++r) {
      const VectorXd a = problem.U.A().row(r).transpose();
      c.input_slack =
          std::min(c.input_slack, problem.U.b()(r) - a.dot(v_k) -
                                      tighten_row(a, S.responses, k, I, RowKind::kInput));
    }
  }
  const VectorXd dz = (S.z_star.row(N) - S.z_star.row(0)).transpose();
  for (int i = 0; i < n; ++i) {
    const VectorXd e = VectorXd::Unit(n, i);
    c.return_slack = std::min(c.return_slack, S.alpha_axes(i) - std::abs(dz(i)) -
                                                  tighten_row(e, S.responses, N, I));
  }
  return c;
}

bool check_learned_input(const VectorXd& x, const VectorXd& u_L, const ExplicitSafeSet& S,
                         const SafetyProblem& problem) {
  if (u_L.size() != problem.m() || !problem.U.contains(u_L, 0.0)) return false;
  const VectorXd d = (problem.A * x + problem.B * u_L - S.center()).cwiseAbs() +
                     problem.B_w.cwiseAbs().rowwise().sum();
  return (d - S.alpha_axes).maxCoeff() <= 0.0;
}

VectorXd backup_input(const BackupState& bs, const ExplicitSafeSet& S) {
  const int j = bs.j;
  SLSF_THROW_UNLESS(bs.engaged && j >= 0 && j < S.horizon() &&
                        static_cast<int>(bs.history.size()) == j + 1,
                    ErrorCode::kHistoryInconsistent, "backup history does not match phase");
  VectorXd u = S.v_star.row(j).transpose();
  for (int i = 0; i <= j; ++i) {
    SLSF_THROW_UNLESS(bs.history[i].size() == S.n(), ErrorCode::kHistoryInconsistent,
                      "backup history state size");
    u += S.K_star.block(j, i) * (bs.history[i] - S.z_star.row(i).transpose());
  }
  return u;
}

ExplicitFilter::ExplicitFilter(const SafetyProblem& problem, ExplicitSafeSet S)
    : problem_(problem), S_(std::move(S)) {
  SLSF_THROW_UNLESS(S_.n() == problem.n() && S_.m() == problem.m(),
                    ErrorCode::kDimensionMismatch, "safe set does not match the problem");
}

FilterResult ExplicitFilter::filter(const VectorXd& x, const VectorXd& u_L) {
  const auto t0 = std::chrono::steady_clock::now();
  FilterResult r;
  r.u_learned = u_L;
  r.feasible = true;
  r.status = solver::Status::kOptimal;
  if (check_learned_input(x, u_L, S_, problem_)) {
    state_ = {};
    r.u_applied = u_L;
  } else {
    if (!state_.engaged || state_.j == 0) {
      state_.engaged = true;
      state_.j = 0;
      state_.history.assign(1, x);
    } else {
      state_.history.push_back(x);
    }
    r.u_applied = backup_input(state_, S_);
    r.backup_engaged = true;
    state_.j = (state_.j + 1) % S_.horizon();
    if (state_.j == 0) {
      state_.engaged = false;
      state_.history.clear();
    }
  }
  r.intervention = (r.u_applied - u_L).norm();
  r.solve_time_s = r.total_time_s = detail::seconds_since(t0);
  return r;
}

Algorithm1Trace run_algorithm1(const SafetyProblem& problem, const ExplicitSafeSet& S,
                               const VectorXd& x0, const Policy& learned,
                               const DisturbanceSource& disturbance, int T) {
  SLSF_THROW_UNLESS(S.contains(x0, 1e-12), ErrorCode::kInitialStateOutsideSafeSet,
                    "initial state is outside the explicit safe set");
  ExplicitFilter f(problem, S);
  Algorithm1Trace tr;
  tr.x.resize(T + 1, problem.n());
  tr.u.resize(T, problem.m());
  VectorXd x = x0;
  tr.x.row(0) = x.transpose();
  for (int t = 0; t < T; ++t) {
    const int j = f.state().engaged ? f.state().j : 0;
    const FilterResult r = f.filter(x, learned(x, t));
    tr.accepted.push_back(!r.backup_engaged);
    tr.phase.push_back(r.backup_engaged ? j : -1);
    if (r.backup_engaged) ++tr.interventions;
    if (!problem.X.contains(x, 1e-9)) ++tr.state_violations;
    if (!problem.U.contains(r.u_applied, 1e-9)) ++tr.input_violations;
    const VectorXd w = disturbance(x, t);
    SLSF_THROW_UNLESS(w.size() == problem.n_w() && w.cwiseAbs().maxCoeff() <= 1.0 + 1e-12,
                      ErrorCode::kInvalidArgument, "disturbance outside the unit box");
    x = problem.A * x + problem.B * r.u_applied + problem.B_w * w;
    tr.u.row(t) = r.u_applied.transpose();
    tr.x.row(t + 1) = x.transpose();
  }
  if (!problem.X.contains(x, 1e-9)) ++tr.state_violations;
  return tr;
}

// ---------------------------------------------------------------------------
// Hull of the stage reachable sets

poly::Polytope rci_hull(const ExplicitSafeSet& S) {
  const int n = S.n(), N = S.horizon();
  SLSF_THROW_UNLESS(n <= 3, ErrorCode::kDimensionTooLarge, "rci_hull supports n <= 3");
  std::vector<VectorXd> points;
  for (int k = 0; k < N; ++k) {
    const MatrixXd row = S.responses.Phi_x.block_row(k);
    std::vector<int> cols;
    for (int j = 0; j < row.cols(); ++j)
      if (row.col(j).cwiseAbs().maxCoeff() > 0.0) cols.push_back(j);
    MatrixXd G(n, static_cast<int>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) G.col(static_cast<int>(j)) = row.col(cols[j]);
    const auto v = poly::zonotope_vertices(S.z_star.row(k).transpose(), G);
    points.insert(points.end(), v.begin(), v.end());
  }
  return poly::convex_hull(points, n);
}

namespace {

// u in U,  C_A B u <= C_b - ||C_a B_w||_1 - C_A A x.
struct RciRows {
  MatrixXd G;
  VectorXd h0;
  MatrixXd F;  // rhs = h0 - F x
};

RciRows rci_rows(const poly::Polytope& C, const SafetyProblem& p) {
  SLSF_THROW_UNLESS(C.dim() == p.n(), ErrorCode::kDimensionMismatch, "RCI set dimension");
  RciRows r;
  const int nc = C.num_rows(), nu = p.U.num_rows();
  r.G.resize(nc + nu, p.m());
  r.G << C.A() * p.B, p.U.A();
  r.h0.resize(nc + nu);
  r.h0 << C.b() - (C.A() * p.B_w).cwiseAbs().rowwise().sum(), p.U.b();
  r.F = MatrixXd::Zero(nc + nu, p.n());
  r.F.topRows(nc) = C.A() * p.A;
  return r;
}

}  // namespace

VectorXd rci_filter(const VectorXd& x, const VectorXd& u_L, const poly::Polytope& C,
                    const SafetyProblem& problem) {
  const int m = problem.m();
  SLSF_THROW_UNLESS(x.size() == problem.n() && u_L.size() == m, ErrorCode::kDimensionMismatch,
                    "state/input size");
  const RciRows r = rci_rows(C, problem);
  const auto prog = solver::make_program(2.0 * MatrixXd::Identity(m, m), -2.0 * u_L,
                                         MatrixXd(0, m), VectorXd(0), r.G, r.h0 - r.F * x);
  const auto sol = solver::solve(prog, solver::Settings::from_env());
  SLSF_THROW_UNLESS(sol.status != solver::Status::kInfeasible, ErrorCode::kInfeasible,
                    "state is outside the robust pre-image of the RCI set");
  SLSF_THROW_UNLESS(sol.status == solver::Status::kOptimal, ErrorCode::kSolverFailure,
                    "RCI filter program did not converge");
  return sol.x;
}

struct RciFilter::Impl {
  SafetyProblem problem;
  poly::Polytope C;
  RciRows rows;
  detail::QpCore core;

  Impl(const SafetyProblem& p, poly::Polytope c, const solver::Settings& s)
      : problem(p), C(std::move(c)), rows(rci_rows(C, p)) {
    const int m = p.m();
    ProgramBuilder b;
    const int u = b.add_variables(m);
    for (int i = 0; i < rows.G.rows(); ++i)
      b.add_le(row_expr(rows.G.row(i), u) - rows.h0(i));
    std::vector<LinExpr> cost;
    for (int i = 0; i < m; ++i) cost.push_back(LinExpr::var(u + i));
    core.init(b, cost, s);
  }

  FilterResult run(const VectorXd& x, const VectorXd& u_L) {
    const auto t0 = std::chrono::steady_clock::now();
    SLSF_THROW_UNLESS(x.size() == problem.n() && u_L.size() == problem.m(),
                      ErrorCode::kDimensionMismatch, "state/input size");
    core.set_data(VectorXd(0), rows.h0 - rows.F * x, -u_L);
    const auto sol = core.solve();
    FilterResult r;
    r.u_learned = u_L;
    r.status = sol.status;
    r.iterations = sol.iterations;
    r.solve_time_s = sol.solve_time_s;
    r.feasible = sol.status == solver::Status::kOptimal;
    if (r.feasible) {
      r.u_applied = sol.x;
    } else {
      r.u_applied = project_input(problem.U, u_L);
      r.backup_engaged = true;
    }
    r.intervention = (r.u_applied - u_L).norm();
    r.total_time_s = detail::seconds_since(t0);
    return r;
  }
};

RciFilter::RciFilter(const SafetyProblem& problem, poly::Polytope C, solver::Settings settings)
    : impl_(std::make_unique<Impl>(problem, std::move(C), settings)) {}
RciFilter::~RciFilter() = default;
FilterResult RciFilter::filter(const VectorXd& x, const VectorXd& u_L) {
  return impl_->run(x, u_L);
}
bool RciFilter::is_feasible(const VectorXd& x) { return impl_->C.contains(x, 1e-9); }
void RciFilter::reset() { impl_->core.reset(); }
const poly::Polytope& RciFilter::set() const { return impl_->C; }

}  // namespace slsf
