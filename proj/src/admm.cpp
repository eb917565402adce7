#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <vector>

#include <Eigen/SparseCholesky>

#include "slsf/error.hpp"
#include "slsf/solver.hpp"

namespace slsf::solver {

using Eigen::VectorXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr double kRhoEqScale = 1e3;
constexpr double kMinScaling = 1e-4;
constexpr double kMaxScaling = 1e4;

using Triplets = std::vector<Eigen::Triplet<double>>;
using Ldlt = Eigen::SimplicialLDLT<SpMat, Eigen::Upper, Eigen::AMDOrdering<int>>;

double inf_norm(const VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

VectorXd col_inf_norms(const SpMat& M) {
  VectorXd out = VectorXd::Zero(M.cols());
  for (int j = 0; j < M.outerSize(); ++j) {
    for (SpMat::InnerIterator it(M, j); it; ++it) {
      out(j) = std::max(out(j), std::abs(it.value()));
    }
  }
  return out;
}

VectorXd row_inf_norms(const SpMat& M) {
  VectorXd out = VectorXd::Zero(M.rows());
  for (int j = 0; j < M.outerSize(); ++j) {
    for (SpMat::InnerIterator it(M, j); it; ++it) {
      out(it.row()) = std::max(out(it.row()), std::abs(it.value()));
    }
  }
  return out;
}

double clamp_scaling(double v) {
  if (v < kMinScaling) return 1.0;  // empty column / row
  return std::min(v, kMaxScaling);
}

SpMat vstack(const SpMat& top, const SpMat& bottom, int cols) {
  Triplets t;
  t.reserve(top.nonZeros() + bottom.nonZeros());
  for (int j = 0; j < top.outerSize(); ++j)
    for (SpMat::InnerIterator it(top, j); it; ++it) t.emplace_back(it.row(), j, it.value());
  for (int j = 0; j < bottom.outerSize(); ++j)
    for (SpMat::InnerIterator it(bottom, j); it; ++it)
      t.emplace_back(top.rows() + it.row(), j, it.value());
  SpMat out(top.rows() + bottom.rows(), cols);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

}  // namespace

std::string_view to_string(Status status) {
  switch (status) {
    case Status::kOptimal: return "optimal";
    case Status::kInfeasible: return "infeasible";
    case Status::kUnbounded: return "unbounded";
    case Status::kMaxIter: return "max_iter";
  }
  return "unknown";
}

void ConicProgram::validate() const {
  const int n = num_variables();
  SLSF_THROW_UNLESS(H.rows() == n && H.cols() == n, ErrorCode::kDimensionMismatch,
                    "H must be n x n");
  SLSF_THROW_UNLESS(A_eq.cols() == n || A_eq.rows() == 0, ErrorCode::kDimensionMismatch,
                    "A_eq column count");
  SLSF_THROW_UNLESS(A_in.cols() == n || A_in.rows() == 0, ErrorCode::kDimensionMismatch,
                    "A_in column count");
  SLSF_THROW_UNLESS(A_eq.rows() == b_eq.size(), ErrorCode::kDimensionMismatch, "b_eq size");
  SLSF_THROW_UNLESS(A_in.rows() == b_in.size(), ErrorCode::kDimensionMismatch, "b_in size");
  const SpMat asym = SpMat(H - SpMat(H.transpose()));
  double max_asym = 0.0;
  for (int j = 0; j < asym.outerSize(); ++j)
    for (SpMat::InnerIterator it(asym, j); it; ++it)
      max_asym = std::max(max_asym, std::abs(it.value()));
  SLSF_THROW_UNLESS(max_asym <= 1e-12, ErrorCode::kInvalidArgument, "H not symmetric");
  SLSF_THROW_UNLESS(f.allFinite() && b_eq.allFinite(), ErrorCode::kInvalidArgument,
                    "non-finite cost or equality data");
  SLSF_THROW_UNLESS(!b_in.hasNaN(), ErrorCode::kInvalidArgument, "NaN in b_in");
}

double ConicProgram::objective(const VectorXd& x) const {
  return 0.5 * x.dot(H * x) + f.dot(x);
}

ConicProgram make_program(const Eigen::MatrixXd& H, const VectorXd& f,
                          const Eigen::MatrixXd& A_eq, const VectorXd& b_eq,
                          const Eigen::MatrixXd& A_in, const VectorXd& b_in) {
  const int n = static_cast<int>(f.size());
  ConicProgram p;
  p.H = H.size() ? SpMat(H.sparseView()) : SpMat(n, n);
  p.f = f;
  p.A_eq = A_eq.rows() ? SpMat(A_eq.sparseView()) : SpMat(0, n);
  p.b_eq = b_eq;
  p.A_in = A_in.rows() ? SpMat(A_in.sparseView()) : SpMat(0, n);
  p.b_in = b_in;
  return p;
}

Settings Settings::from_env(Settings base) {
  if (const char* v = std::getenv("SLSF_EPS_ABS")) base.eps_abs = std::strtod(v, nullptr);
  if (const char* v = std::getenv("SLSF_EPS_REL")) base.eps_rel = std::strtod(v, nullptr);
  if (const char* v = std::getenv("SLSF_MAX_ITER"))
    base.max_iter = static_cast<int>(std::strtol(v, nullptr, 10));
  return base;
}

Settings Settings::from_env() { return from_env(Settings{}); }

// ---------------------------------------------------------------------------

struct AdmmSolver::Impl {
  Settings cfg;
  ConicProgram original;
  int n = 0;
  int m = 0;
  int m_eq = 0;

  // Scaled data: P = c D P0 D, q = c D q0, A = E A0 D, l = E l0, u = E u0.
  SpMat P;
  SpMat A;
  SpMat At;
  VectorXd q, l, u;
  VectorXd D, E, Dinv, Einv;
  double c = 1.0;

  VectorXd rho_vec;
  double rho = 0.1;
  Ldlt kkt;
  bool pattern_analyzed = false;

  VectorXd x, z, y;
  bool warm = false;

  explicit Impl(const ConicProgram& prog, Settings s) : cfg(s), original(prog) {
    prog.validate();
    n = prog.num_variables();
    m_eq = static_cast<int>(prog.A_eq.rows());
    m = m_eq + static_cast<int>(prog.A_in.rows());
    SpMat A0 = vstack(prog.A_eq.rows() ? prog.A_eq : SpMat(0, n),
                      prog.A_in.rows() ? prog.A_in : SpMat(0, n), n);
    VectorXd l0(m), u0(m);
    l0 << prog.b_eq, VectorXd::Constant(m - m_eq, -kInf);
    u0 << prog.b_eq, prog.b_in;
    equilibrate(prog.H, A0, prog.f);
    l = E.cwiseProduct(l0);
    u = E.cwiseProduct(u0);
    rho = cfg.rho;
    build_rho_vec();
    factorize();
    x = VectorXd::Zero(n);
    z = VectorXd::Zero(m);
    y = VectorXd::Zero(m);
  }

  void equilibrate(const SpMat& P0, const SpMat& A0, const VectorXd& q0) {
    P = P0;
    A = A0;
    q = q0;
    D = VectorXd::Ones(n);
    E = VectorXd::Ones(m);
    c = 1.0;
    for (int it = 0; it < cfg.scaling_iter; ++it) {
      VectorXd dcol(n), erow(m);
      const VectorXd pn = col_inf_norms(P);
      const VectorXd an = col_inf_norms(A);
      for (int j = 0; j < n; ++j) dcol(j) = 1.0 / std::sqrt(clamp_scaling(std::max(pn(j), an(j))));
      const VectorXd rn = row_inf_norms(A);
      for (int i = 0; i < m; ++i) erow(i) = 1.0 / std::sqrt(clamp_scaling(rn(i)));
      P = dcol.asDiagonal() * P * dcol.asDiagonal();
      A = erow.asDiagonal() * A * dcol.asDiagonal();
      q = dcol.cwiseProduct(q);
      D = D.cwiseProduct(dcol);
      E = E.cwiseProduct(erow);
    }
    const VectorXd pn = col_inf_norms(P);
    const double mean_p = n ? pn.mean() : 0.0;
    double gamma = 1.0 / clamp_scaling(std::max(mean_p, inf_norm(q)));
    gamma = std::min(gamma, kMaxScaling);
    P *= gamma;
    q *= gamma;
    c = gamma;
    At = A.transpose();
    Dinv = D.cwiseInverse();
    Einv = E.cwiseInverse();
  }

  void build_rho_vec() {
    rho_vec.resize(m);
    for (int i = 0; i < m; ++i) {
      const bool eq = (l(i) == u(i));
      const bool free_row = std::isinf(l(i)) && std::isinf(u(i));
      rho_vec(i) = free_row ? kRhoMin : (eq ? kRhoEqScale * rho : rho);
    }
  }

  SpMat kkt_matrix(const VectorXd& lower_diag, const SpMat& Asub, double top_reg) const {
    const int k = static_cast<int>(Asub.rows());
    Triplets t;
    t.reserve(P.nonZeros() + Asub.nonZeros() + n + k);
    for (int j = 0; j < P.outerSize(); ++j)
      for (SpMat::InnerIterator it(P, j); it; ++it)
        if (it.row() <= j) t.emplace_back(it.row(), j, it.value());
    for (int j = 0; j < n; ++j) t.emplace_back(j, j, top_reg);
    for (int j = 0; j < Asub.outerSize(); ++j)
      for (SpMat::InnerIterator it(Asub, j); it; ++it) t.emplace_back(j, n + it.row(), it.value());
    for (int i = 0; i < k; ++i) t.emplace_back(n + i, n + i, lower_diag(i));
    SpMat K(n + k, n + k);
    K.setFromTriplets(t.begin(), t.end());
    return K;
  }

  void factorize() {
    const SpMat K = kkt_matrix(-rho_vec.cwiseInverse(), A, cfg.sigma);
    if (!pattern_analyzed) {
      kkt.analyzePattern(K);
      pattern_analyzed = true;
    }
    kkt.factorize(K);
    SLSF_THROW_UNLESS(kkt.info() == Eigen::Success, ErrorCode::kSolverFailure,
                      "KKT factorization failed");
  }

  struct Residuals {
    double prim, dual, eps_prim, eps_dual;
  };

  Residuals residuals(const VectorXd& xs, const VectorXd& zs, const VectorXd& ys) const {
    const VectorXd Ax = A * xs;
    const VectorXd Px = P * xs;
    const VectorXd Aty = At * ys;
    Residuals r;
    r.prim = inf_norm(Einv.cwiseProduct(Ax - zs));
    r.dual = inf_norm(Dinv.cwiseProduct(Px + q + Aty)) / c;
    r.eps_prim = cfg.eps_abs + cfg.eps_rel * std::max(inf_norm(Einv.cwiseProduct(Ax)),
                                                      inf_norm(Einv.cwiseProduct(zs)));
    r.eps_dual = cfg.eps_abs + cfg.eps_rel / c *
                                   std::max({inf_norm(Dinv.cwiseProduct(Px)),
                                             inf_norm(Dinv.cwiseProduct(Aty)),
                                             inf_norm(Dinv.cwiseProduct(q))});
    return r;
  }

  bool primal_infeasible(const VectorXd& dy) const {
    const VectorXd dyu = E.cwiseProduct(dy);
    const double norm = inf_norm(dyu);
    if (norm < 1e-30) return false;
    const double tol = cfg.eps_prim_inf * norm;
    if (inf_norm(Dinv.cwiseProduct(At * dy)) > tol) return false;
    double support = 0.0;
    for (int i = 0; i < m; ++i) {
      const double lu = Einv(i) * l(i);
      const double uu = Einv(i) * u(i);
      if (dyu(i) > tol) {
        if (std::isinf(uu)) return false;
        support += uu * dyu(i);
      } else if (dyu(i) < -tol) {
        if (std::isinf(lu)) return false;
        support += lu * dyu(i);
      }
    }
    return support < -tol;
  }

  bool dual_infeasible(const VectorXd& dx) const {
    const VectorXd dxu = D.cwiseProduct(dx);
    const double norm = inf_norm(dxu);
    if (norm < 1e-30) return false;
    const double tol = cfg.eps_dual_inf * norm;
    if (inf_norm(Dinv.cwiseProduct(P * dx)) / c > tol) return false;
    if (Dinv.cwiseProduct(q).dot(dxu) / c >= -tol) return false;
    const VectorXd Adx = Einv.cwiseProduct(A * dx);
    for (int i = 0; i < m; ++i) {
      const bool lo = !std::isinf(l(i));
      const bool hi = !std::isinf(u(i));
      if (hi && Adx(i) > tol) return false;
      if (lo && Adx(i) < -tol) return false;
    }
    return true;
  }

  void maybe_update_rho() {
    const VectorXd Ax = A * x;
    const VectorXd Px = P * x;
    const VectorXd Aty = At * y;
    const double prim_scale = std::max({inf_norm(Ax), inf_norm(z), 1e-30});
    const double dual_scale = std::max({inf_norm(Px), inf_norm(Aty), inf_norm(q), 1e-30});
    const double prim = inf_norm(Ax - z) / prim_scale;
    const double dual = inf_norm(Px + q + Aty) / dual_scale;
    if (prim <= 0.0 || dual <= 0.0) return;
    double rho_new = rho * std::sqrt(prim / dual);
    rho_new = std::clamp(rho_new, kRhoMin, kRhoMax);
    if (rho_new > cfg.adaptive_rho_tolerance * rho || rho_new < rho / cfg.adaptive_rho_tolerance) {
      rho = rho_new;
      build_rho_vec();
      factorize();
    }
  }

  // Active constraint guess: +1 upper, -1 lower, 2 equality, 0 inactive.
  std::vector<int> guess_active(const VectorXd& zs, const VectorXd& ys) const {
    std::vector<int> act(m, 0);
    for (int i = 0; i < m; ++i) {
      if (l(i) == u(i)) {
        act[i] = 2;
      } else if (!std::isinf(u(i)) && u(i) - zs(i) < ys(i)) {
        act[i] = 1;
      } else if (!std::isinf(l(i)) && zs(i) - l(i) < -ys(i)) {
        act[i] = -1;
      }
    }
    return act;
  }

  struct Polished {
    bool ok = false;
    VectorXd x, z, y;
  };

  // Solves the equality-constrained QP on an active set, then repairs the
  // set (drop wrong-sign multipliers, add violated rows) a few times.
  Polished polish(std::vector<int> act, const VectorXd& anchor) const {
    Polished out;
    for (int pass = 0; pass < cfg.polish_active_set_passes; ++pass) {
      std::vector<int> idx;
      for (int i = 0; i < m; ++i)
        if (act[i] != 0) idx.push_back(i);
      const int k = static_cast<int>(idx.size());
      Triplets t;
      VectorXd b(k);
      for (int r = 0; r < k; ++r) {
        const int i = idx[r];
        b(r) = (act[i] == -1) ? l(i) : u(i);
      }
      const SpMat Ar = [&] {
        SpMat S(k, m);
        Triplets st;
        for (int r = 0; r < k; ++r) st.emplace_back(r, idx[r], 1.0);
        S.setFromTriplets(st.begin(), st.end());
        return SpMat(S * A);
      }();
      const double delta = cfg.polish_delta;
      const double prox = cfg.polish_prox;
      const SpMat K = kkt_matrix(VectorXd::Constant(k, -delta), Ar, delta + prox);
      Ldlt solver;
      solver.compute(K);
      if (solver.info() != Eigen::Success) return out;

      VectorXd rhs(n + k);
      rhs << prox * anchor - q, b;
      VectorXd sol = solver.solve(rhs);
      const SpMat Art = Ar.transpose();
      for (int r = 0; r < cfg.polish_refine_iter; ++r) {
        const VectorXd xs = sol.head(n);
        const VectorXd ys = sol.tail(k);
        VectorXd res(n + k);
        res.head(n) = prox * (anchor - xs) - q - P * xs - Art * ys;
        res.tail(k) = b - Ar * xs;
        sol += solver.solve(res);
      }
      if (!sol.allFinite()) return out;

      const VectorXd xs = sol.head(n);
      VectorXd ys = VectorXd::Zero(m);
      for (int r = 0; r < k; ++r) ys(idx[r]) = sol(n + r);
      const VectorXd Ax = A * xs;

      bool changed = false;
      const double sign_tol = 1e-12;
      for (int r = 0; r < k; ++r) {
        const int i = idx[r];
        if ((act[i] == 1 && ys(i) < -sign_tol) || (act[i] == -1 && ys(i) > sign_tol)) {
          act[i] = 0;
          changed = true;
        }
      }
      for (int i = 0; i < m; ++i) {
        if (act[i] != 0) continue;
        const double tol = 1e-12 * (1.0 + std::abs(u(i)));
        if (!std::isinf(u(i)) && Ax(i) > u(i) + tol) {
          act[i] = 1;
          changed = true;
        } else if (!std::isinf(l(i)) && Ax(i) < l(i) - tol) {
          act[i] = -1;
          changed = true;
        }
      }
      if (!changed) {
        out.ok = true;
        out.x = xs;
        out.y = ys;
        out.z = Ax.cwiseMax(l).cwiseMin(u);
        return out;
      }
    }
    return out;
  }

  Solution make_solution(Status status, const VectorXd& xs, const VectorXd& ys, int iter,
                         const Residuals& r) const {
    Solution s;
    s.status = status;
    s.x = D.cwiseProduct(xs);
    const VectorXd yu = E.cwiseProduct(ys) / c;
    s.y_eq = yu.head(m_eq);
    s.y_in = yu.tail(m - m_eq);
    s.primal_residual = r.prim;
    s.dual_residual = r.dual;
    s.objective = original.objective(s.x);
    s.iterations = iter;
    return s;
  }

  bool try_polish(const VectorXd& zs, const VectorXd& ys, Solution* out, int iter) {
    Polished p = polish(guess_active(zs, ys), x);
    if (!p.ok) return false;
    const Residuals r = residuals(p.x, p.z, p.y);
    if (r.prim > r.eps_prim || r.dual > r.eps_dual) return false;
    *out = make_solution(Status::kOptimal, p.x, p.y, iter, r);
    out->polished = true;
    x = p.x;
    z = p.z;
    y = p.y;
    return true;
  }

  Solution run() {
    const auto t0 = std::chrono::steady_clock::now();
    auto finish = [&](Solution s) {
      s.solve_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      warm = (s.status == Status::kOptimal);
      if (!warm) {
        x.setZero();
        z.setZero();
        y.setZero();
      }
      return s;
    };

    if (!warm) {
      x.setZero();
      z = VectorXd::Zero(m).cwiseMax(l).cwiseMin(u);
      y.setZero();
    }

    VectorXd rhs(n + m);
    VectorXd x_prev, z_prev, y_prev;
    std::vector<int> last_polish_set;
    int primal_hits = 0, dual_hits = 0;

    for (int k = 1; k <= cfg.max_iter; ++k) {
      x_prev = x;
      z_prev = z;
      y_prev = y;
      const VectorXd rho_inv = rho_vec.cwiseInverse();
      rhs.head(n) = cfg.sigma * x - q;
      rhs.tail(m) = z - rho_inv.cwiseProduct(y);
      const VectorXd sol = kkt.solve(rhs);
      const VectorXd x_tilde = sol.head(n);
      const VectorXd z_tilde = z + rho_inv.cwiseProduct(sol.tail(m) - y);
      x = cfg.alpha * x_tilde + (1.0 - cfg.alpha) * x_prev;
      const VectorXd z_relax = cfg.alpha * z_tilde + (1.0 - cfg.alpha) * z_prev;
      z = (z_relax + rho_inv.cwiseProduct(y)).cwiseMax(l).cwiseMin(u);
      y = y + rho_vec.cwiseProduct(z_relax - z);

      if (k % cfg.check_interval != 0 && k != cfg.max_iter) continue;

      const Residuals r = residuals(x, z, y);
      if (r.prim <= r.eps_prim && r.dual <= r.eps_dual) {
        Solution s;
        if (cfg.polish && try_polish(z, y, &s, k)) return finish(s);
        return finish(make_solution(Status::kOptimal, x, y, k, r));
      }
      primal_hits = primal_infeasible(y - y_prev) ? primal_hits + 1 : 0;
      if (primal_hits >= cfg.infeasibility_confirmations) {
        return finish(make_solution(Status::kInfeasible, x, y, k, r));
      }
      dual_hits = dual_infeasible(x - x_prev) ? dual_hits + 1 : 0;
      if (dual_hits >= cfg.infeasibility_confirmations) {
        return finish(make_solution(Status::kUnbounded, x, y, k, r));
      }
      if (k >= cfg.divergence_min_iter && r.prim > r.eps_prim &&
          inf_norm(E.cwiseProduct(y)) / c > cfg.divergence_threshold) {
        return finish(make_solution(Status::kInfeasible, x, y, k, r));
      }

      // Early polish once the iterate is close and the active set has moved,
      // and periodically when ADMM stalls on a degenerate face.
      const bool close = r.prim <= 1e3 * r.eps_prim + 1e-4 && r.dual <= 1e3 * r.eps_dual + 1e-4;
      const bool stalled = k >= 1000 && k % 1000 == 0;
      if (cfg.polish && (close || stalled)) {
        std::vector<int> act = guess_active(z, y);
        if (act != last_polish_set) {
          last_polish_set = act;
          Solution s;
          if (try_polish(z, y, &s, k)) return finish(s);
        }
      }
      if (cfg.adaptive_rho && k % cfg.adaptive_rho_interval == 0) maybe_update_rho();
    }
    const Residuals r = residuals(x, z, y);
    Solution s;
    if (cfg.polish && try_polish(z, y, &s, cfg.max_iter)) return finish(s);
    return finish(make_solution(Status::kMaxIter, x, y, cfg.max_iter, r));
  }
};

AdmmSolver::AdmmSolver(const ConicProgram& program, Settings settings)
    : impl_(std::make_unique<Impl>(program, settings)) {}
AdmmSolver::~AdmmSolver() = default;
AdmmSolver::AdmmSolver(AdmmSolver&&) noexcept = default;
AdmmSolver& AdmmSolver::operator=(AdmmSolver&&) noexcept = default;

void AdmmSolver::update_linear_cost(const VectorXd& f) {
  SLSF_THROW_UNLESS(f.size() == impl_->n, ErrorCode::kDimensionMismatch, "cost size");
  impl_->original.f = f;
  impl_->q = impl_->c * impl_->D.cwiseProduct(f);
}

void AdmmSolver::update_rhs(const VectorXd& b_eq, const VectorXd& b_in) {
  auto& s = *impl_;
  SLSF_THROW_UNLESS(b_eq.size() == s.m_eq && b_in.size() == s.m - s.m_eq,
                    ErrorCode::kDimensionMismatch, "rhs size");
  s.original.b_eq = b_eq;
  s.original.b_in = b_in;
  VectorXd l0(s.m), u0(s.m);
  l0 << b_eq, VectorXd::Constant(s.m - s.m_eq, -kInf);
  u0 << b_eq, b_in;
  s.l = s.E.cwiseProduct(l0);
  s.u = s.E.cwiseProduct(u0);
}

void AdmmSolver::warm_start(const VectorXd& x) {
  SLSF_THROW_UNLESS(x.size() == impl_->n, ErrorCode::kDimensionMismatch, "warm start size");
  impl_->x = impl_->Dinv.cwiseProduct(x);
  impl_->z = (impl_->A * impl_->x).cwiseMax(impl_->l).cwiseMin(impl_->u);
  impl_->warm = true;
}

void AdmmSolver::cold_start() { impl_->warm = false; }

Solution AdmmSolver::solve() { return impl_->run(); }

const Settings& AdmmSolver::settings() const { return impl_->cfg; }

Solution solve(const ConicProgram& program, const Settings& settings) {
  AdmmSolver s(program, settings);
  return s.solve();
}

KktResiduals kkt_residuals(const ConicProgram& p, const Solution& s) {
  KktResiduals r;
  VectorXd grad = p.H * s.x + p.f;
  if (p.A_eq.rows()) grad += p.A_eq.transpose() * s.y_eq;
  if (p.A_in.rows()) grad += p.A_in.transpose() * s.y_in;
  r.stationarity = inf_norm(grad);
  double prim = 0.0;
  if (p.A_eq.rows()) prim = inf_norm(p.A_eq * s.x - p.b_eq);
  if (p.A_in.rows()) {
    const VectorXd slack = p.b_in - p.A_in * s.x;
    prim = std::max(prim, inf_norm(slack.cwiseMin(0.0)));
    double comp = 0.0;
    for (int i = 0; i < slack.size(); ++i)
      comp = std::max(comp, std::abs(std::max(s.y_in(i), 0.0) * slack(i)));
    r.complementarity = comp;
    r.dual_sign = inf_norm(s.y_in.cwiseMin(0.0));
  }
  r.primal = prim;
  return r;
}

void write_triplets(std::ostream& os, const ConicProgram& p) {
  os << "# n " << p.num_variables() << " m_eq " << p.A_eq.rows() << " m_in " << p.A_in.rows()
     << "\n";
  os.precision(17);
  auto dump = [&](const char* tag, const SpMat& M) {
    for (int j = 0; j < M.outerSize(); ++j)
      for (SpMat::InnerIterator it(M, j); it; ++it)
        os << tag << ' ' << it.row() << ' ' << j << ' ' << it.value() << '\n';
  };
  auto dump_vec = [&](const char* tag, const VectorXd& v) {
    for (int i = 0; i < v.size(); ++i)
      if (v(i) != 0.0) os << tag << ' ' << i << " 0 " << v(i) << '\n';
  };
  dump("H", p.H);
  dump_vec("f", p.f);
  dump("Aeq", p.A_eq);
  dump_vec("beq", p.b_eq);
  dump("Ain", p.A_in);
  dump_vec("bin", p.b_in);
}

}  // namespace slsf::solver
