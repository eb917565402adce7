#include "slsf/sl_mpsf.hpp"

#include <chrono>
#include <optional>

#include "qp_core.hpp"
#include "slsf/error.hpp"
#include "slsf/program_builder.hpp"

namespace slsf {

using solver::LinExpr;
using solver::ProgramBuilder;

SlMpsfCensus SlMpsfCensus::closed_form(int n, int m, int n_w, int N, int n_x, int n_u,
                                       int n_f) {
  SlMpsfCensus c;
  const int tri = N * (N - 1) / 2;
  c.z = (N + 1) * n;
  c.v = N * m;
  c.phi_x = n * n_w * N * (N + 1) / 2;
  c.phi_u = m * n_w * tri;
  c.slack_state = n_x * n_w * tri;
  c.slack_input = n_u * n_w * tri;
  c.slack_terminal = n_f * n_w * N;
  c.variables = c.z + c.v + c.phi_x + c.phi_u + c.slack_state + c.slack_input + c.slack_terminal;
  c.eq_rows = n + N * n + c.phi_x;
  c.in_rows = 2 * (c.slack_state + c.slack_input + c.slack_terminal) + n_x * N + n_u * N + n_f;
  return c;
}

namespace {

struct Layout {
  int n = 0, m = 0, n_w = 0, N = 0;
  int z = 0, v = 0, phx = 0, phu = 0;

  int zi(int k, int i) const { return z + k * n + i; }
  int vi(int k, int i) const { return v + k * m + i; }
  // 1 <= c <= k <= N
  int px(int k, int c, int i, int j) const {
    return phx + (((k - 1) * k / 2 + (c - 1)) * n + i) * n_w + j;
  }
  // 1 <= c <= k <= N-1
  int pu(int k, int c, int i, int j) const {
    return phu + (((k - 1) * k / 2 + (c - 1)) * m + i) * n_w + j;
  }
};

LinExpr row_expr(const Eigen::RowVectorXd& a, int offset) {
  LinExpr e;
  for (int j = 0; j < a.size(); ++j)
    if (a(j) != 0.0) e.terms.emplace_back(offset + j, a(j));
  return e;
}

}  // namespace

struct SlMpsf::Impl {
  SafetyProblem problem;
  solver::Settings settings;
  SlMpsfOptions options;
  poly::Polytope terminal;  // terminal set under the backed-off rows
  Layout lay;
  SlMpsfCensus census;

  detail::QpCore core;
  VectorXd b_eq, b_in;
  std::optional<detail::QpCore> pinned;
  VectorXd pinned_b_eq, pinned_b_in;

  // Runtime fallback state.
  std::optional<FilterResult> last_ok;
  std::optional<BlockLowerTriangular> last_K;
  std::vector<VectorXd> history;

  Impl(const SafetyProblem& p, solver::Settings s, SlMpsfOptions o)
      : problem(p), settings(s), options(o) {
    problem.validate(false);
    SLSF_THROW_UNLESS(problem.terminal.dim() == problem.n(), ErrorCode::kDimensionMismatch,
                      "terminal set dimension");
    terminal = backed_off_terminal(problem.terminal, problem.A, problem.B, problem.K_f, problem.X,
                                   problem.U, problem.B_w, options.backoff, problem.N);
    ProgramBuilder b;
    build(b, false);
    census.variables = b.num_variables();
    census.eq_rows = b.num_eq();
    census.in_rows = b.num_in();
    core.init(b, cost_rows(), settings);
    b_eq = core.program().b_eq;
    b_in = core.program().b_in;
  }

  std::vector<LinExpr> cost_rows() const {
    std::vector<LinExpr> rows;
    for (int i = 0; i < lay.m; ++i) rows.push_back(LinExpr::var(lay.vi(0, i)));
    return rows;
  }

  void build(ProgramBuilder& b, bool pin) {
    const auto& p = problem;
    lay.n = p.n();
    lay.m = p.m();
    lay.n_w = p.n_w();
    lay.N = p.N;
    const int n = lay.n, m = lay.m, n_w = lay.n_w, N = lay.N;
    lay.z = b.add_variables((N + 1) * n);
    lay.v = b.add_variables(N * m);
    lay.phx = b.add_variables(n * n_w * N * (N + 1) / 2);
    lay.phu = b.add_variables(m * n_w * N * (N - 1) / 2);
    census.z = (N + 1) * n;
    census.v = N * m;
    census.phi_x = n * n_w * N * (N + 1) / 2;
    census.phi_u = m * n_w * N * (N - 1) / 2;

    // z_0 = x
    for (int i = 0; i < n; ++i) b.add_eq(LinExpr::var(lay.zi(0, i)));
    if (pin)
      for (int i = 0; i < m; ++i) b.add_eq(LinExpr::var(lay.vi(0, i)));
    // Nominal dynamics.
    for (int k = 0; k < N; ++k) {
      for (int i = 0; i < n; ++i) {
        LinExpr e = LinExpr::var(lay.zi(k + 1, i));
        e -= row_expr(p.A.row(i), lay.zi(k, 0));
        e -= row_expr(p.B.row(i), lay.vi(k, 0));
        b.add_eq(e);
      }
    }
    // Subspace equation on the disturbance columns.
    for (int k = 1; k <= N; ++k) {
      for (int c = 1; c <= k; ++c) {
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n_w; ++j) {
            LinExpr e = LinExpr::var(lay.px(k, c, i, j));
            if (c <= k - 1) {
              for (int l = 0; l < n; ++l)
                if (p.A(i, l) != 0.0) e.terms.emplace_back(lay.px(k - 1, c, l, j), -p.A(i, l));
              for (int l = 0; l < m; ++l)
                if (p.B(i, l) != 0.0) e.terms.emplace_back(lay.pu(k - 1, c, l, j), -p.B(i, l));
            } else {
              e.constant = -p.B_w(i, j);
            }
            b.add_eq(e);
          }
        }
      }
    }

    auto phi_x_entries = [&](const Eigen::RowVectorXd& a, int k) {
      std::vector<LinExpr> out;
      for (int c = 1; c <= k; ++c) {
        for (int j = 0; j < n_w; ++j) {
          LinExpr e;
          for (int i = 0; i < n; ++i)
            if (a(i) != 0.0) e.terms.emplace_back(lay.px(k, c, i, j), a(i));
          out.push_back(e);
        }
      }
      return out;
    };
    auto phi_u_entries = [&](const Eigen::RowVectorXd& a, int k) {
      std::vector<LinExpr> out;
      for (int c = 1; c <= k; ++c) {
        for (int j = 0; j < n_w; ++j) {
          LinExpr e;
          for (int i = 0; i < m; ++i)
            if (a(i) != 0.0) e.terms.emplace_back(lay.pu(k, c, i, j), a(i));
          out.push_back(e);
        }
      }
      return out;
    };
    auto slack_count = [](const std::vector<LinExpr>& entries) {
      int s = 0;
      for (const auto& e : entries)
        if (!e.is_constant()) ++s;
      return s;
    };

    census.slack_state = census.slack_input = census.slack_terminal = 0;
    for (int k = 0; k < N; ++k) {
      for (int r = 0; r < p.X.num_rows(); ++r) {
        const Eigen::RowVectorXd a = p.X.A().row(r);
        const auto entries = phi_x_entries(a, k);
        census.slack_state += slack_count(entries);
        const double backoff = k == 0 ? 0.0 : stage_backoff(options.backoff, k);
        encode_l1_row(b, entries, LinExpr(p.X.b()(r) - backoff) - row_expr(a, lay.zi(k, 0)));
      }
      for (int r = 0; r < p.U.num_rows(); ++r) {
        const Eigen::RowVectorXd a = p.U.A().row(r);
        const auto entries = phi_u_entries(a, k);
        census.slack_input += slack_count(entries);
        encode_l1_row(b, entries,
                      LinExpr(p.U.b()(r) - stage_backoff(options.backoff, k)) -
                          row_expr(a, lay.vi(k, 0)));
      }
    }
    for (int r = 0; r < terminal.num_rows(); ++r) {
      const Eigen::RowVectorXd a = terminal.A().row(r);
      const auto entries = phi_x_entries(a, N);
      census.slack_terminal += slack_count(entries);
      encode_l1_row(b, entries, LinExpr(terminal.b()(r)) - row_expr(a, lay.zi(N, 0)));
    }

    const double reg = options.regularization;
    if (reg > 0.0) {
      for (int i = m; i < N * m; ++i) b.add_square(LinExpr::var(lay.v + i), reg);
      for (int i = lay.phx; i < lay.phu + census.phi_u; ++i) b.add_square(LinExpr::var(i), reg);
    }
  }

  void set_data(const VectorXd& x, const VectorXd& u_L) {
    SLSF_THROW_UNLESS(x.size() == lay.n && u_L.size() == lay.m, ErrorCode::kDimensionMismatch,
                      "state/input size");
    b_eq.head(lay.n) = x;
    core.set_data(b_eq, b_in, -u_L);
  }

  SystemResponses decode(const VectorXd& y) const {
    const int n = lay.n, m = lay.m, n_w = lay.n_w, N = lay.N;
    SystemResponses r{BlockLowerTriangular(N, n, n_w, 0), BlockLowerTriangular(N, m, n_w, 0)};
    for (int k = 1; k <= N; ++k) {
      for (int c = 1; c <= k; ++c) {
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n_w; ++j) r.Phi_x.block(k, c)(i, j) = y(lay.px(k, c, i, j));
        if (k <= N - 1)
          for (int i = 0; i < m; ++i)
            for (int j = 0; j < n_w; ++j) r.Phi_u.block(k, c)(i, j) = y(lay.pu(k, c, i, j));
      }
    }
    return r;
  }

  FilterResult step(const VectorXd& x, const VectorXd& u_L) {
    const auto t0 = std::chrono::steady_clock::now();
    set_data(x, u_L);
    const auto sol = core.solve();
    FilterResult r;
    r.u_learned = u_L;
    r.status = sol.status;
    r.iterations = sol.iterations;
    r.solve_time_s = sol.solve_time_s;
    r.feasible = sol.status == solver::Status::kOptimal;
    if (r.feasible) {
      r.u_applied = sol.x.segment(lay.v, lay.m);
      r.intervention = (r.u_applied - u_L).norm();
      r.z_plan.resize(lay.N + 1, lay.n);
      r.v_plan.resize(lay.N, lay.m);
      for (int k = 0; k <= lay.N; ++k) r.z_plan.row(k) = sol.x.segment(lay.zi(k, 0), lay.n);
      for (int k = 0; k < lay.N; ++k) r.v_plan.row(k) = sol.x.segment(lay.vi(k, 0), lay.m);
      if (options.retain_responses) r.responses = decode(sol.x);
    }
    r.total_time_s = detail::seconds_since(t0);
    return r;
  }

  VectorXd fallback_input(const VectorXd& x, const VectorXd& u_L) {
    history.push_back(x);
    const int j = static_cast<int>(history.size()) - 1;
    if (!last_ok || !last_ok->responses || j >= lay.N) return project_input(problem.U, u_L);
    if (!last_K) {
      try {
        last_K = controller_from_responses(*last_ok->responses);
      } catch (const Error&) {
        return project_input(problem.U, u_L);
      }
    }
    VectorXd u = last_ok->v_plan.row(j).transpose();
    for (int l = 1; l <= j; ++l)
      u += last_K->block(j, l) * (history[l] - last_ok->z_plan.row(l).transpose());
    return u;
  }
};

SlMpsf::SlMpsf(const SafetyProblem& problem, solver::Settings settings, SlMpsfOptions options)
    : impl_(std::make_unique<Impl>(problem, settings, options)) {}
SlMpsf::~SlMpsf() = default;
SlMpsf::SlMpsf(SlMpsf&&) noexcept = default;
SlMpsf& SlMpsf::operator=(SlMpsf&&) noexcept = default;

FilterResult SlMpsf::filter(const VectorXd& x, const VectorXd& u_L) {
  auto& s = *impl_;
  FilterResult r = s.step(x, u_L);
  if (r.feasible) {
    s.last_ok = r;
    s.last_K.reset();
    s.history.assign(1, x);
    return r;
  }
  r.backup_engaged = true;
  r.u_applied = s.fallback_input(x, u_L);
  r.intervention = (r.u_applied - u_L).norm();
  return r;
}

FilterResult SlMpsf::filter_step(const VectorXd& x, const VectorXd& u_L) {
  return impl_->step(x, u_L);
}

bool SlMpsf::is_feasible(const VectorXd& x) {
  return impl_->step(x, VectorXd::Zero(impl_->lay.m)).feasible;
}

bool SlMpsf::is_feasible_with_input(const VectorXd& x, const VectorXd& v0) {
  auto& s = *impl_;
  SLSF_THROW_UNLESS(x.size() == s.lay.n && v0.size() == s.lay.m, ErrorCode::kDimensionMismatch,
                    "state/input size");
  if (!s.pinned) {
    ProgramBuilder b;
    s.build(b, true);
    s.pinned.emplace();
    s.pinned->init(b, s.cost_rows(), s.settings);
    s.pinned_b_eq = s.pinned->program().b_eq;
    s.pinned_b_in = s.pinned->program().b_in;
  }
  s.pinned_b_eq.head(s.lay.n) = x;
  s.pinned_b_eq.segment(s.lay.n, s.lay.m) = v0;
  s.pinned->set_data(s.pinned_b_eq, s.pinned_b_in, VectorXd::Zero(s.lay.m));
  return s.pinned->solve().status == solver::Status::kOptimal;
}

void SlMpsf::reset() {
  impl_->core.reset();
  impl_->last_ok.reset();
  impl_->last_K.reset();
  impl_->history.clear();
}

const solver::ConicProgram& SlMpsf::assemble(const VectorXd& x, const VectorXd& u_L) {
  impl_->set_data(x, u_L);
  return impl_->core.program();
}

const SlMpsfCensus& SlMpsf::census() const { return impl_->census; }
const SafetyProblem& SlMpsf::problem() const { return impl_->problem; }

SystemResponses SlMpsf::decode_responses(const VectorXd& y) const { return impl_->decode(y); }

}  // namespace slsf
