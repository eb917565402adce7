#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "slsf/explicit_filter.hpp"
#include "slsf/filter.hpp"
#include "slsf/polytope.hpp"
#include "slsf/sls_core.hpp"

namespace slsf::sim {

struct Episode {
  MatrixXd states;          // (T+1) x n
  MatrixXd inputs;          // T x m, applied
  MatrixXd learned;         // T x m
  VectorXd interventions;   // T
  std::vector<bool> backup_engaged;
  int state_violations = 0;
  int input_violations = 0;
  std::vector<double> step_times;

  int violations() const { return state_violations + input_violations; }
};

/// Row tolerance used when counting constraint violations.
inline constexpr double kViolationTol = 1e-6;

/// Closed loop x+ = A x + B u + B_w w with u the filtered input. Throws
/// InitialStateOutsideSafeSet when the filter rejects x0.
Episode run_episode(SafetyFilter& filter, const SafetyProblem& problem, const Policy& learned,
                    const DisturbanceSource& disturbance, const VectorXd& x0, int T);

// Learned-input generators.
Policy constant_policy(VectorXd u);
Policy linear_policy(MatrixXd K);
/// Uniform draws from the bounding box of scale * U.
Policy random_policy(const SafetyProblem& problem, double scale, std::uint64_t seed);
/// Mostly the vertex of scale * U that pushes A x + B u furthest out of X,
/// otherwise a random vertex.
Policy adversarial_policy(const SafetyProblem& problem, double scale, std::uint64_t seed);

enum class DisturbanceKind { kZero, kUniform, kVertex, kMixed };
DisturbanceKind parse_disturbance_kind(const std::string& name);
/// Seeded generator; every draw is checked to lie in the unit box.
DisturbanceSource make_disturbance(DisturbanceKind kind, int n_w, std::uint64_t seed);

struct GridSpec {
  VectorXd lo, hi;
  std::vector<int> counts;

  /// Cell centers of a uniform grid over the bounding box of X.
  static GridSpec over(const poly::Polytope& X, int per_axis);
  std::vector<VectorXd> points() const;
  int size() const;
};

struct MethodGrid {
  std::string name;
  std::vector<char> feasible;
  std::vector<double> max_intervention;  // NaN where infeasible or not evaluated
  int count() const;
};

struct GridStudy {
  GridSpec grid;
  std::vector<MethodGrid> methods;

  const MethodGrid* find(const std::string& name) const;
  /// Fraction of the reference cells that the method covers.
  double coverage(const std::string& name, const std::string& reference) const;
  /// Cells where a is feasible and b is not.
  int counterexamples(const std::string& a, const std::string& b) const;
};

using FilterFactory = std::function<std::unique_ptr<SafetyFilter>()>;

/// Runs fn(i) for i < count on a pool of threads (0 = hardware concurrency).
void parallel_for(int count, const std::function<void(int worker, int i)>& fn, int threads = 0);

/// Feasibility and the maximal intervention over the vertices of U per cell.
/// One filter instance per worker.
MethodGrid intervention_map(const std::string& name, const FilterFactory& factory,
                            const SafetyProblem& problem, const GridSpec& grid,
                            bool with_interventions = true, int threads = 0);
/// Membership of each cell in a polytope.
MethodGrid membership_map(const std::string& name, const poly::Polytope& P,
                          const GridSpec& grid);
/// Membership of each cell in a box.
MethodGrid membership_map(const std::string& name, const poly::Box& box, const GridSpec& grid);

struct InterventionStats {
  int cells = 0;
  double mean_a = 0.0, max_a = 0.0;
  double mean_b = 0.0, max_b = 0.0;
  int cells_a_above_b = 0;  // a > b + tol
};
/// Statistics over cells where both methods are feasible.
InterventionStats compare_interventions(const MethodGrid& a, const MethodGrid& b,
                                        double tol = 1e-4);

struct TimingStats {
  std::string method;
  int samples = 0;
  double mean_s = 0.0, std_s = 0.0, median_s = 0.0;
  double mean_total_s = 0.0, median_total_s = 0.0;
};

/// A timed method returns (solve seconds, total seconds) for one sample.
struct TimedMethod {
  std::string name;
  std::function<std::pair<double, double>(const VectorXd& x, const VectorXd& u_L)> run;
};
/// Solver time and call time of a filter, cold started per sample.
TimedMethod timed_filter(SafetyFilter& filter);
/// Average time of the explicit input check over reps repetitions.
TimedMethod timed_explicit_check(const ExplicitSafeSet& S, const SafetyProblem& problem,
                                 int reps = 1000);

/// Uniform states in the bounding box of X and inputs in the bounding box of
/// U. The same seed draws the same set.
std::vector<std::pair<VectorXd, VectorXd>> sample_pairs(const SafetyProblem& problem, int count,
                                                        std::uint64_t seed);
std::vector<TimingStats> timing_bench(const std::vector<TimedMethod>& methods,
                                      const SafetyProblem& problem, int n_samples,
                                      std::uint64_t seed);

/// Rejection sampling of states the predicate accepts, uniform over the
/// bounding box of X. Throws Empty after max_tries draws without a hit.
std::vector<VectorXd> sample_states(const SafetyProblem& problem,
                                    const std::function<bool(const VectorXd&)>& accept,
                                    int count, std::uint64_t seed, int max_tries = 1000000);

/// CSV with columns x1..xn, feasible_<method>..., max_intervention_<method>...
void write_grid_csv(std::ostream& os, const GridStudy& study);
void write_timing_csv(std::ostream& os, const std::vector<TimingStats>& stats);
void write_episode_csv(std::ostream& os, const Episode& ep);

}  // namespace slsf::sim
