// Acceptance suite on the double integrator. Prints one PASS/FAIL line per
// criterion and exits nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "slsf/baseline_mpsf.hpp"
#include "slsf/config.hpp"
#include "slsf/error.hpp"
#include "slsf/explicit_filter.hpp"
#include "slsf/polytope.hpp"
#include "slsf/sim.hpp"
#include "slsf/sl_mpsf.hpp"
#include "slsf/sls_core.hpp"
#include "slsf/solver.hpp"

namespace {

using namespace slsf;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("[%s] %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(),
              o.detail.c_str(), secs);
  std::fflush(stdout);
}

SafetyProblem double_integrator(int N = 10) {
  ProblemConfig cfg = ProblemConfig::defaults();
  cfg.N = N;
  return build_problem(cfg);
}

std::vector<VectorXd> cube_vertices(int d) {
  std::vector<VectorXd> out;
  for (int mask = 0; mask < (1 << d); ++mask) {
    VectorXd v(d);
    for (int i = 0; i < d; ++i) v(i) = (mask >> i) & 1 ? 1.0 : -1.0;
    out.push_back(v);
  }
  return out;
}

// Worst case of a' dx_k (or a' du_k) over every disturbance vertex sequence
// of the error system dx+ = A dx + B du + B_w w, du_k = sum K(k, c) dx_c.
double brute_force_row(const SafetyProblem& p, const BlockLowerTriangular& K, const VectorXd& a,
                       int k, bool input_row) {
  const int N = p.N;
  const auto verts = cube_vertices(p.n_w());
  const long V = static_cast<long>(verts.size());
  long total = 1;
  for (int s = 0; s < N; ++s) total *= V;
  double worst = -std::numeric_limits<double>::infinity();
  for (long code = 0; code < total; ++code) {
    std::vector<VectorXd> dx(N + 1, VectorXd::Zero(p.n()));
    std::vector<VectorXd> du(N + 1, VectorXd::Zero(p.m()));
    long c = code;
    for (int t = 0; t <= N; ++t) {
      for (int s = 0; s <= t; ++s) du[t] += K.block(t, s) * dx[s];
      if (t == N) break;
      dx[t + 1] = p.A * dx[t] + p.B * du[t] + p.B_w * verts[c % V];
      c /= V;
    }
    worst = std::max(worst, input_row ? a.dot(du[k]) : a.dot(dx[k]));
  }
  return worst;
}

Outcome tightening_exactness() {
  const SafetyProblem p = double_integrator(3);
  const auto sys = build_stacked(p, MatrixXd(p.n(), 0));
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  double worst_err = 0.0;
  int rows = 0;
  for (int trial = 0; trial < 3; ++trial) {
    BlockLowerTriangular K(p.N, p.m(), p.n(), p.n());
    for (int k = 0; k <= p.N; ++k)
      for (int c = 0; c <= k; ++c) K.block(k, c) = MatrixXd::NullaryExpr(p.m(), p.n(), [&] { return d(rng); });
    const SystemResponses r = responses_from_controller(sys, K);
    for (int k = 0; k <= p.N; ++k) {
      for (int i = 0; i < p.X.num_rows(); ++i, ++rows) {
        const VectorXd a = p.X.A().row(i).transpose();
        worst_err = std::max(worst_err, std::abs(tighten_row(a, r, k, MatrixXd(0, 0)) -
                                                 brute_force_row(p, K, a, k, false)));
      }
      for (int i = 0; i < p.U.num_rows(); ++i, ++rows) {
        const VectorXd a = p.U.A().row(i).transpose();
        worst_err = std::max(worst_err,
                             std::abs(tighten_row(a, r, k, MatrixXd(0, 0), RowKind::kInput) -
                                      brute_force_row(p, K, a, k, true)));
      }
    }
  }
  std::ostringstream s;
  s << rows << " rows, max |error| " << worst_err;
  return {worst_err <= 1e-9, s.str()};
}

Outcome recursive_feasibility(const SafetyProblem& p) {
  SlMpsf f(p);
  const auto states =
      sim::sample_states(p, [&](const VectorXd& x) { return f.is_feasible(x); }, 1000, 202);
  std::mt19937_64 rng(203);
  std::uniform_real_distribution<double> du(-6.0, 6.0);
  const auto W = cube_vertices(p.n_w());
  int failed = 0;
  for (const VectorXd& x : states) {
    const FilterResult r = f.filter_step(x, VectorXd::Constant(1, du(rng)));
    if (!r.feasible) {
      ++failed;
      continue;
    }
    const VectorXd xp = p.A * x + p.B * r.u_applied + p.B_w * W[rng() % W.size()];
    if (!f.is_feasible(xp)) ++failed;
  }
  return {failed == 0, std::to_string(states.size()) + " trials, " + std::to_string(failed) +
                           " failures"};
}

Outcome robust_safety(const SafetyProblem& p, const TubeConfig& tube, const ExplicitSafeSet& S) {
  std::vector<std::unique_ptr<SafetyFilter>> filters;
  filters.push_back(std::make_unique<SlMpsf>(p));
  filters.push_back(std::make_unique<TubeFilter>(p, tube));
  filters.push_back(std::make_unique<ExplicitFilter>(p, S));
  filters.push_back(std::make_unique<RciFilter>(p, rci_hull(S)));
  std::ostringstream s;
  int total = 0;
  for (std::size_t fi = 0; fi < filters.size(); ++fi) {
    SafetyFilter& f = *filters[fi];
    const auto x0s = sim::sample_states(p, [&](const VectorXd& x) { return f.is_feasible(x); }, 100,
                                        300 + fi);
    int v = 0;
    for (int e = 0; e < 100; ++e) {
      f.reset();
      const auto ep = sim::run_episode(f, p, sim::adversarial_policy(p, 2.0, 1000 * fi + e),
                                       sim::make_disturbance(sim::DisturbanceKind::kVertex, p.n_w(),
                                                             5000 + 1000 * fi + e),
                                       x0s[e], 50);
      v += ep.violations();
    }
    total += v;
    s << (fi ? ", " : "") << f.name() << " " << v;
  }
  s << " violations over 100 x 50 steps each";
  return {total == 0, s.str()};
}

struct GridResult {
  sim::GridStudy study;
};

Outcome safe_set_ordering(const GridResult& g) {
  const sim::GridStudy& s = g.study;
  const int ce = s.counterexamples("tube", "sl");
  const double cs = s.coverage("sl", "xi_max"), ct = s.coverage("tube", "xi_max");
  std::ostringstream d;
  d << ce << " counterexample cells, coverage sl " << cs << " tube " << ct;
  return {ce == 0 && cs >= ct + 0.05, d.str()};
}

Outcome explicit_relations(const GridResult& g, const ExplicitSafeSet& S) {
  const sim::GridStudy& s = g.study;
  const auto& e = s.find("explicit")->feasible;
  const auto& om = s.find("omega_max")->feasible;
  const auto& tb = s.find("tube")->feasible;
  int outside = 0, om_not_e = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] && !om[i] && !tb[i]) ++outside;
    if (om[i] && !e[i]) ++om_not_e;
  }
  std::ostringstream d;
  d << "alpha " << S.alpha << ", " << outside << " explicit cells outside omega_max and tube set, "
    << om_not_e << " omega_max cells outside explicit set";
  return {S.alpha > 0.0 && outside >= 1 && om_not_e >= 1, d.str()};
}

Outcome intervention_dominance(const GridResult& g) {
  const auto iv = sim::compare_interventions(*g.study.find("sl"), *g.study.find("tube"), 1e-4);
  std::ostringstream d;
  d << iv.cells << " joint cells, mean sl " << iv.mean_a << " tube " << iv.mean_b << ", max sl "
    << iv.max_a << " tube " << iv.max_b << ", cells sl > tube + 1e-4: " << iv.cells_a_above_b;
  const bool ok = iv.cells > 0 && iv.mean_a <= iv.mean_b + 1e-4 && iv.max_a <= iv.max_b + 1e-4 &&
                  iv.cells_a_above_b <= 0.01 * iv.cells;
  return {ok, d.str()};
}

Outcome periodic_return(const SafetyProblem& p, const ExplicitSafeSet& S) {
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const auto W = cube_vertices(p.n_w());
  int failed = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 1000; ++trial) {
    VectorXd x = S.center() + S.alpha_axes.cwiseProduct(
                                  VectorXd::NullaryExpr(p.n(), [&] { return unit(rng); }));
    BackupState bs;
    bs.engaged = true;
    for (int j = 0; j < S.horizon(); ++j) {
      bs.j = j;
      bs.history.push_back(x);
      x = p.A * x + p.B * backup_input(bs, S) + p.B_w * W[rng() % W.size()];
    }
    const double slack = (S.alpha_axes - (x - S.center()).cwiseAbs()).minCoeff();
    worst = std::min(worst, slack);
    if (slack < -1e-8) ++failed;
  }
  std::ostringstream d;
  d << "1000 samples, " << failed << " failures, min per-axis slack " << worst;
  return {failed == 0, d.str()};
}

Outcome timing_ordering(const SafetyProblem& p, const TubeConfig& tube, const ExplicitSafeSet& S) {
  SlMpsf sl(p);
  TubeFilter tf(p, tube);
  const auto stats = sim::timing_bench(
      {sim::timed_filter(sl), sim::timed_filter(tf), sim::timed_explicit_check(S, p)}, p, 200, 808);
  auto med = [&](const std::string& n) {
    for (const auto& t : stats)
      if (t.method == n) return t.median_s;
    return std::nan("");
  };
  const double e = med("explicit"), t = med("tube"), s = med("sl");
  std::ostringstream d;
  d << "median explicit " << e << " s, tube " << t << " s, sl " << s << " s";
  return {e <= 1e-2 * s && t <= s, d.str()};
}

// Best KKT point over all active sets of a strictly convex QP.
bool qp_oracle(const MatrixXd& H, const VectorXd& f, const MatrixXd& G, const VectorXd& h,
               double* best) {
  const int n = static_cast<int>(f.size()), r = static_cast<int>(h.size());
  bool found = false;
  *best = std::numeric_limits<double>::infinity();
  for (int mask = 0; mask < (1 << r); ++mask) {
    std::vector<int> act;
    for (int i = 0; i < r; ++i)
      if ((mask >> i) & 1) act.push_back(i);
    const int k = static_cast<int>(act.size());
    if (k > n) continue;
    MatrixXd K = MatrixXd::Zero(n + k, n + k);
    VectorXd rhs(n + k);
    K.topLeftCorner(n, n) = H;
    rhs.head(n) = -f;
    for (int j = 0; j < k; ++j) {
      K.block(0, n + j, n, 1) = G.row(act[j]).transpose();
      K.block(n + j, 0, 1, n) = G.row(act[j]);
      rhs(n + j) = h(act[j]);
    }
    Eigen::FullPivLU<MatrixXd> lu(K);
    if (!lu.isInvertible()) continue;
    const VectorXd sol = lu.solve(rhs);
    const VectorXd x = sol.head(n);
    if (k > 0 && sol.tail(k).minCoeff() < -1e-10) continue;
    if ((G * x - h).maxCoeff() > 1e-9) continue;
    *best = std::min(*best, 0.5 * x.dot(H * x) + f.dot(x));
    found = true;
  }
  return found;
}

// Best feasible vertex over all n-row subsets.
bool lp_oracle(const VectorXd& f, const MatrixXd& G, const VectorXd& h, double* best) {
  const int n = static_cast<int>(f.size()), r = static_cast<int>(h.size());
  bool found = false;
  *best = std::numeric_limits<double>::infinity();
  for (int mask = 0; mask < (1 << r); ++mask) {
    if (__builtin_popcount(mask) != n) continue;
    MatrixXd A(n, n);
    VectorXd b(n);
    for (int i = 0, j = 0; i < r; ++i)
      if ((mask >> i) & 1) {
        A.row(j) = G.row(i);
        b(j++) = h(i);
      }
    Eigen::FullPivLU<MatrixXd> lu(A);
    if (!lu.isInvertible()) continue;
    const VectorXd x = lu.solve(b);
    if ((G * x - h).maxCoeff() > 1e-9) continue;
    *best = std::min(*best, f.dot(x));
    found = true;
  }
  return found;
}

Outcome solver_soundness() {
  std::mt19937_64 rng(909);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.1, 1.0);
  double obj_err = 0.0, kkt = 0.0;
  int bad = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const bool lp = trial % 2 == 1;
    const int n = 2 + trial % 3, r = 2 * n + 3;
    MatrixXd H = MatrixXd::Zero(n, n);
    if (!lp) {
      const MatrixXd M = MatrixXd::NullaryExpr(n, n, [&] { return g(rng); });
      H = M * M.transpose() + 0.1 * MatrixXd::Identity(n, n);
    }
    const VectorXd f = VectorXd::NullaryExpr(n, [&] { return 3.0 * g(rng); });
    MatrixXd G(r, n);
    VectorXd h(r);
    G.topRows(n) = MatrixXd::Identity(n, n);
    G.middleRows(n, n) = -MatrixXd::Identity(n, n);
    h.head(2 * n) = VectorXd::NullaryExpr(2 * n, [&] { return 1.0 + u(rng); });
    for (int i = 2 * n; i < r; ++i) {
      G.row(i) = VectorXd::NullaryExpr(n, [&] { return g(rng); }).transpose();
      h(i) = 0.5 * u(rng);
    }
    double ref = 0.0;
    const bool found = lp ? lp_oracle(f, G, h, &ref) : qp_oracle(H, f, G, h, &ref);
    const auto prog = solver::make_program(H, f, MatrixXd(0, n), VectorXd(0), G, h);
    const solver::Solution s = solver::solve(prog);
    if (!found || s.status != solver::Status::kOptimal) {
      ++bad;
      continue;
    }
    const auto res = solver::kkt_residuals(prog, s);
    const double k = std::max({res.stationarity, res.primal, res.complementarity, res.dual_sign});
    const double e = std::abs(s.objective - ref);
    obj_err = std::max(obj_err, e);
    kkt = std::max(kkt, k);
    if (e > 1e-6 || k > 1e-6) ++bad;
  }
  std::ostringstream d;
  d << "200 programs, " << bad << " failures, max objective error " << obj_err
    << ", max KKT residual " << kkt;
  return {bad == 0, d.str()};
}

Outcome degeneracy() {
  ProblemConfig cfg = ProblemConfig::defaults();
  cfg.w_box = VectorXd::Zero(2);
  const SafetyProblem p = build_problem(cfg);
  SlMpsf sl(p);
  NominalFilter nom(p);
  std::mt19937_64 rng(1010);
  std::uniform_real_distribution<double> dx(-5.0, 5.0), du(-6.0, 6.0);
  int cases = 0, mismatched = 0, tries = 0;
  double worst = 0.0;
  while (cases < 20 && tries < 10000) {
    ++tries;
    const VectorXd x = Eigen::Vector2d(dx(rng), dx(rng));
    const VectorXd uL = VectorXd::Constant(1, du(rng));
    const FilterResult a = sl.filter_step(x, uL);
    const FilterResult b = nom.filter(x, uL);
    if (a.feasible != b.feasible) {
      ++mismatched;
      continue;
    }
    if (!a.feasible) continue;
    ++cases;
    const double e = (a.u_applied - b.u_applied).cwiseAbs().maxCoeff();
    worst = std::max(worst, e);
    if (e > 1e-6) ++mismatched;
  }
  std::ostringstream d;
  d << cases << " cases, " << mismatched << " mismatches, max |u_sl - u_nominal| " << worst;
  return {cases == 20 && mismatched == 0, d.str()};
}

}  // namespace

int main() {
  const SafetyProblem p = double_integrator();
  const TubeConfig tube = make_tube_config(p, p.K_f);
  const ExplicitSafeSet S = synthesize(p);

  report(1, "tightening exactness", tightening_exactness);
  report(2, "recursive feasibility", [&] { return recursive_feasibility(p); });
  report(3, "robust safety", [&] { return robust_safety(p, tube, S); });

  GridResult grid;
  {
    auto& s = grid.study;
    s.grid = sim::GridSpec::over(p.X, 50);
    s.methods.push_back(sim::intervention_map(
        "tube", [&] { return std::make_unique<TubeFilter>(p, tube); }, p, s.grid));
    s.methods.push_back(
        sim::intervention_map("sl", [&] { return std::make_unique<SlMpsf>(p); }, p, s.grid));
    s.methods.push_back(sim::membership_map("explicit", S.box(), s.grid));
    s.methods.push_back(sim::membership_map("omega_max", p.terminal, s.grid));
    s.methods.push_back(sim::membership_map(
        "xi_max", poly::max_rci(p.A, p.B, p.U, p.X, p.B_w, p.disturbance_box()), s.grid));
  }
  report(4, "safe-set ordering", [&] { return safe_set_ordering(grid); });
  report(5, "explicit-set relations", [&] { return explicit_relations(grid, S); });
  report(6, "intervention dominance", [&] { return intervention_dominance(grid); });
  report(7, "periodic return", [&] { return periodic_return(p, S); });
  report(8, "timing ordering", [&] { return timing_ordering(p, tube, S); });
  report(9, "solver soundness", solver_soundness);
  report(10, "degeneracy reductions", degeneracy);

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
