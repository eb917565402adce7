#include "slsf/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include "slsf/error.hpp"

namespace slsf::sim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  if (v.empty()) return kNaN;
  const std::size_t h = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + h, v.end());
  if (v.size() % 2 == 1) return v[h];
  const double hi = v[h];
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + h));
}

}  // namespace

Episode run_episode(SafetyFilter& filter, const SafetyProblem& problem, const Policy& learned,
                    const DisturbanceSource& disturbance, const VectorXd& x0, int T) {
  const int n = problem.n(), m = problem.m();
  SLSF_THROW_UNLESS(x0.size() == n && T >= 0, ErrorCode::kDimensionMismatch, "episode setup");
  filter.reset();
  SLSF_THROW_UNLESS(filter.is_feasible(x0), ErrorCode::kInitialStateOutsideSafeSet,
                    "initial state is outside the filter's safe set");
  filter.reset();
  Episode ep;
  ep.states.resize(T + 1, n);
  ep.inputs.resize(T, m);
  ep.learned.resize(T, m);
  ep.interventions.resize(T);
  VectorXd x = x0;
  ep.states.row(0) = x.transpose();
  for (int t = 0; t < T; ++t) {
    const VectorXd u_L = learned(x, t);
    const auto t0 = std::chrono::steady_clock::now();
    const FilterResult r = filter.filter(x, u_L);
    ep.step_times.push_back(seconds_since(t0));
    if (!problem.X.contains(x, kViolationTol)) ++ep.state_violations;
    if (!problem.U.contains(r.u_applied, kViolationTol)) ++ep.input_violations;
    ep.learned.row(t) = u_L.transpose();
    ep.inputs.row(t) = r.u_applied.transpose();
    ep.interventions(t) = r.intervention;
    ep.backup_engaged.push_back(r.backup_engaged);
    x = problem.A * x + problem.B * r.u_applied + problem.B_w * disturbance(x, t);
    ep.states.row(t + 1) = x.transpose();
  }
  if (!problem.X.contains(x, kViolationTol)) ++ep.state_violations;
  return ep;
}

// ---------------------------------------------------------------------------
// Learned inputs

Policy constant_policy(VectorXd u) {
  return [u = std::move(u)](const VectorXd&, int) { return u; };
}

Policy linear_policy(MatrixXd K) {
  return [K = std::move(K)](const VectorXd& x, int) -> VectorXd { return K * x; };
}

Policy random_policy(const SafetyProblem& problem, double scale, std::uint64_t seed) {
  const poly::Box box = problem.U.bounding_box();
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return [box, scale, rng](const VectorXd&, int) -> VectorXd {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    VectorXd u(box.center.size());
    for (int i = 0; i < u.size(); ++i) u(i) = box.center(i) + scale * box.half_widths(i) * d(*rng);
    return u;
  };
}

Policy adversarial_policy(const SafetyProblem& problem, double scale, std::uint64_t seed) {
  std::vector<VectorXd> verts = poly::vertices(problem.U);
  for (auto& v : verts) v *= scale;
  auto rng = std::make_shared<std::mt19937_64>(seed);
  const MatrixXd A = problem.A, B = problem.B, HX = problem.X.A();
  const VectorXd hX = problem.X.b();
  return [verts, rng, A, B, HX, hX](const VectorXd& x, int) -> VectorXd {
    std::uniform_real_distribution<double> d(0.0, 1.0);
    if (d(*rng) < 0.2) {
      std::uniform_int_distribution<std::size_t> pick(0, verts.size() - 1);
      return verts[pick(*rng)];
    }
    const VectorXd Ax = A * x;
    double best = -std::numeric_limits<double>::infinity();
    VectorXd out = verts.front();
    for (const auto& v : verts) {
      const double viol = ((HX * (Ax + B * v) - hX).array() / hX.array().abs().max(1e-9)).maxCoeff();
      if (viol > best) {
        best = viol;
        out = v;
      }
    }
    return out;
  };
}

DisturbanceKind parse_disturbance_kind(const std::string& name) {
  if (name == "zero") return DisturbanceKind::kZero;
  if (name == "uniform") return DisturbanceKind::kUniform;
  if (name == "vertex") return DisturbanceKind::kVertex;
  if (name == "mixed") return DisturbanceKind::kMixed;
  throw Error(ErrorCode::kInvalidArgument, "unknown disturbance kind: " + name);
}

DisturbanceSource make_disturbance(DisturbanceKind kind, int n_w, std::uint64_t seed) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return [kind, n_w, rng](const VectorXd&, int) -> VectorXd {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    VectorXd w = VectorXd::Zero(n_w);
    bool vertex = kind == DisturbanceKind::kVertex;
    if (kind == DisturbanceKind::kMixed) vertex = coin(*rng);
    if (kind != DisturbanceKind::kZero) {
      for (int i = 0; i < n_w; ++i) w(i) = vertex ? (coin(*rng) ? 1.0 : -1.0) : uni(*rng);
    }
    SLSF_THROW_UNLESS(w.size() == 0 || w.cwiseAbs().maxCoeff() <= 1.0, ErrorCode::kInvalidArgument,
                      "disturbance draw outside the unit box");
    return w;
  };
}

// ---------------------------------------------------------------------------
// Grids

GridSpec GridSpec::over(const poly::Polytope& X, int per_axis) {
  SLSF_THROW_UNLESS(per_axis > 0, ErrorCode::kInvalidArgument, "grid resolution");
  const poly::Box box = X.bounding_box();
  GridSpec g;
  g.lo = box.center - box.half_widths;
  g.hi = box.center + box.half_widths;
  g.counts.assign(X.dim(), per_axis);
  return g;
}

int GridSpec::size() const {
  int s = 1;
  for (int c : counts) s *= c;
  return counts.empty() ? 0 : s;
}

std::vector<VectorXd> GridSpec::points() const {
  const int n = static_cast<int>(counts.size());
  std::vector<VectorXd> out;
  out.reserve(size());
  std::vector<int> idx(n, 0);
  for (int cell = 0; cell < size(); ++cell) {
    VectorXd x(n);
    for (int i = 0; i < n; ++i) {
      const double h = (hi(i) - lo(i)) / counts[i];
      x(i) = lo(i) + (idx[i] + 0.5) * h;
    }
    out.push_back(x);
    for (int i = 0; i < n; ++i) {
      if (++idx[i] < counts[i]) break;
      idx[i] = 0;
    }
  }
  return out;
}

int MethodGrid::count() const {
  return static_cast<int>(std::count(feasible.begin(), feasible.end(), 1));
}

const MethodGrid* GridStudy::find(const std::string& name) const {
  for (const auto& m : methods)
    if (m.name == name) return &m;
  return nullptr;
}

double GridStudy::coverage(const std::string& name, const std::string& reference) const {
  const MethodGrid* a = find(name);
  const MethodGrid* r = find(reference);
  SLSF_THROW_UNLESS(a && r, ErrorCode::kInvalidArgument, "unknown method in grid study");
  int hit = 0;
  for (std::size_t i = 0; i < r->feasible.size(); ++i) hit += r->feasible[i] && a->feasible[i];
  const int total = r->count();
  return total ? static_cast<double>(hit) / total : 0.0;
}

int GridStudy::counterexamples(const std::string& a, const std::string& b) const {
  const MethodGrid* ga = find(a);
  const MethodGrid* gb = find(b);
  SLSF_THROW_UNLESS(ga && gb, ErrorCode::kInvalidArgument, "unknown method in grid study");
  int c = 0;
  for (std::size_t i = 0; i < ga->feasible.size(); ++i) c += ga->feasible[i] && !gb->feasible[i];
  return c;
}

void parallel_for(int count, const std::function<void(int worker, int i)>& fn, int threads) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(0, i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(w, i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

MethodGrid intervention_map(const std::string& name, const FilterFactory& factory,
                            const SafetyProblem& problem, const GridSpec& grid,
                            bool with_interventions, int threads) {
  const auto pts = grid.points();
  const int count = static_cast<int>(pts.size());
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::max(1, std::min(threads, count));
  std::vector<std::unique_ptr<SafetyFilter>> filters;
  for (int w = 0; w < threads; ++w) filters.push_back(factory());
  const std::vector<VectorXd> u_verts = poly::vertices(problem.U);

  MethodGrid out;
  out.name = name;
  out.feasible.assign(count, 0);
  out.max_intervention.assign(count, kNaN);
  parallel_for(
      count,
      [&](int w, int i) {
        SafetyFilter& f = *filters[w];
        f.reset();
        if (!f.is_feasible(pts[i])) return;
        out.feasible[i] = 1;
        if (!with_interventions) return;
        double worst = 0.0;
        for (const auto& u : u_verts) {
          f.reset();
          worst = std::max(worst, f.filter(pts[i], u).intervention);
        }
        out.max_intervention[i] = worst;
      },
      threads);
  return out;
}

MethodGrid membership_map(const std::string& name, const poly::Polytope& P, const GridSpec& grid) {
  MethodGrid out;
  out.name = name;
  for (const auto& x : grid.points()) out.feasible.push_back(P.contains(x, 1e-9) ? 1 : 0);
  out.max_intervention.assign(out.feasible.size(), kNaN);
  return out;
}

MethodGrid membership_map(const std::string& name, const poly::Box& box, const GridSpec& grid) {
  MethodGrid out;
  out.name = name;
  for (const auto& x : grid.points()) out.feasible.push_back(box.contains(x, 0.0) ? 1 : 0);
  out.max_intervention.assign(out.feasible.size(), kNaN);
  return out;
}

InterventionStats compare_interventions(const MethodGrid& a, const MethodGrid& b, double tol) {
  InterventionStats s;
  for (std::size_t i = 0; i < a.feasible.size(); ++i) {
    if (!a.feasible[i] || !b.feasible[i]) continue;
    const double va = a.max_intervention[i], vb = b.max_intervention[i];
    if (std::isnan(va) || std::isnan(vb)) continue;
    ++s.cells;
    s.mean_a += va;
    s.mean_b += vb;
    s.max_a = std::max(s.max_a, va);
    s.max_b = std::max(s.max_b, vb);
    if (va > vb + tol) ++s.cells_a_above_b;
  }
  if (s.cells) {
    s.mean_a /= s.cells;
    s.mean_b /= s.cells;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Timing

TimedMethod timed_filter(SafetyFilter& filter) {
  return {filter.name(), [&filter](const VectorXd& x, const VectorXd& u) {
            filter.reset();
            const FilterResult r = filter.filter(x, u);
            return std::make_pair(r.solve_time_s, r.total_time_s);
          }};
}

TimedMethod timed_explicit_check(const ExplicitSafeSet& S, const SafetyProblem& problem,
                                 int reps) {
  return {"explicit", [&S, &problem, reps](const VectorXd& x, const VectorXd& u) {
            volatile bool sink = false;
            const auto t0 = std::chrono::steady_clock::now();
            for (int r = 0; r < reps; ++r) sink = check_learned_input(x, u, S, problem);
            (void)sink;
            const double dt = seconds_since(t0) / reps;
            return std::make_pair(dt, dt);
          }};
}

std::vector<std::pair<VectorXd, VectorXd>> sample_pairs(const SafetyProblem& problem, int count,
                                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const poly::Box bx = problem.X.bounding_box();
  const poly::Box bu = problem.U.bounding_box();
  std::vector<std::pair<VectorXd, VectorXd>> out;
  out.reserve(count);
  for (int s = 0; s < count; ++s) {
    VectorXd x(bx.center.size()), u(bu.center.size());
    for (int i = 0; i < x.size(); ++i) x(i) = bx.center(i) + bx.half_widths(i) * d(rng);
    for (int i = 0; i < u.size(); ++i) u(i) = bu.center(i) + bu.half_widths(i) * d(rng);
    out.emplace_back(x, u);
  }
  return out;
}

std::vector<TimingStats> timing_bench(const std::vector<TimedMethod>& methods,
                                      const SafetyProblem& problem, int n_samples,
                                      std::uint64_t seed) {
  const auto samples = sample_pairs(problem, n_samples, seed);
  std::vector<TimingStats> out;
  for (const auto& method : methods) {
    std::vector<double> solve, total;
    for (const auto& [x, u] : samples) {
      const auto [s, t] = method.run(x, u);
      solve.push_back(s);
      total.push_back(t);
    }
    TimingStats st;
    st.method = method.name;
    st.samples = n_samples;
    if (n_samples > 0) {
      st.mean_s = std::accumulate(solve.begin(), solve.end(), 0.0) / n_samples;
      double var = 0.0;
      for (double s : solve) var += (s - st.mean_s) * (s - st.mean_s);
      st.std_s = std::sqrt(var / n_samples);
      st.median_s = median(solve);
      st.mean_total_s = std::accumulate(total.begin(), total.end(), 0.0) / n_samples;
      st.median_total_s = median(total);
    }
    out.push_back(st);
  }
  return out;
}

std::vector<VectorXd> sample_states(const SafetyProblem& problem,
                                    const std::function<bool(const VectorXd&)>& accept,
                                    int count, std::uint64_t seed, int max_tries) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const poly::Box bx = problem.X.bounding_box();
  std::vector<VectorXd> out;
  int tries = 0;
  while (static_cast<int>(out.size()) < count) {
    SLSF_THROW_UNLESS(tries++ < max_tries, ErrorCode::kEmpty, "no accepted state found");
    VectorXd x(bx.center.size());
    for (int i = 0; i < x.size(); ++i) x(i) = bx.center(i) + bx.half_widths(i) * d(rng);
    if (accept(x)) out.push_back(x);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output

void write_grid_csv(std::ostream& os, const GridStudy& study) {
  const auto pts = study.grid.points();
  const int n = static_cast<int>(study.grid.counts.size());
  for (int i = 0; i < n; ++i) os << (i ? "," : "") << "x" << i + 1;
  for (const auto& m : study.methods) os << ",feasible_" << m.name;
  for (const auto& m : study.methods) os << ",max_intervention_" << m.name;
  os << '\n';
  os.precision(10);
  for (std::size_t c = 0; c < pts.size(); ++c) {
    for (int i = 0; i < n; ++i) os << (i ? "," : "") << pts[c](i);
    for (const auto& m : study.methods) os << ',' << static_cast<int>(m.feasible[c]);
    for (const auto& m : study.methods) {
      os << ',';
      if (!std::isnan(m.max_intervention[c])) os << m.max_intervention[c];
    }
    os << '\n';
  }
}

void write_timing_csv(std::ostream& os, const std::vector<TimingStats>& stats) {
  os << "method,samples,mean_s,std_s,median_s,mean_total_s,median_total_s\n";
  os.precision(6);
  for (const auto& s : stats)
    os << s.method << ',' << s.samples << ',' << s.mean_s << ',' << s.std_s << ',' << s.median_s
       << ',' << s.mean_total_s << ',' << s.median_total_s << '\n';
}

void write_episode_csv(std::ostream& os, const Episode& ep) {
  const int n = static_cast<int>(ep.states.cols()), m = static_cast<int>(ep.inputs.cols());
  os << "t";
  for (int i = 0; i < n; ++i) os << ",x" << i + 1;
  for (int i = 0; i < m; ++i) os << ",u" << i + 1;
  for (int i = 0; i < m; ++i) os << ",uL" << i + 1;
  os << ",intervention,backup\n";
  os.precision(10);
  const int T = static_cast<int>(ep.inputs.rows());
  for (int t = 0; t <= T; ++t) {
    os << t;
    for (int i = 0; i < n; ++i) os << ',' << ep.states(t, i);
    for (int i = 0; i < m; ++i) os << ',' << (t < T ? ep.inputs(t, i) : 0.0);
    for (int i = 0; i < m; ++i) os << ',' << (t < T ? ep.learned(t, i) : 0.0);
    os << ',' << (t < T ? ep.interventions(t) : 0.0) << ',' << (t < T && ep.backup_engaged[t])
       << '\n';
  }
}

}  // namespace slsf::sim
