#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "slsf/baseline_mpsf.hpp"
#include "slsf/config.hpp"
#include "slsf/error.hpp"
#include "slsf/explicit_filter.hpp"
#include "slsf/io.hpp"
#include "slsf/sim.hpp"
#include "slsf/sl_mpsf.hpp"

namespace {

using slsf::Error;
using slsf::ErrorCode;
using slsf::ExplicitSafeSet;
using slsf::MatrixXd;
using slsf::ProblemConfig;
using slsf::SafetyFilter;
using slsf::SafetyProblem;
using slsf::VectorXd;
using slsf::io::Json;
namespace fs = std::filesystem;
namespace poly = slsf::poly;
namespace sim = slsf::sim;

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitConfig = 2;

struct Context {
  std::string config;
  std::string out_dir = ".";
  std::string method;
  bool no_rci = false;

  ProblemConfig cfg;
  SafetyProblem problem;

  void load() {
    cfg = config.empty() ? ProblemConfig::defaults() : slsf::load_config(config);
    if (!method.empty()) {
      std::ostringstream os;
      os << "method: " << method << "\n";
      const ProblemConfig probe = slsf::parse_config(os.str());
      cfg.method = probe.method;
    }
    problem = slsf::build_problem(cfg);
  }
  std::string path(const std::string& name) const {
    fs::create_directories(out_dir);
    return (fs::path(out_dir) / name).string();
  }
  std::string hash() const {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << slsf::config_hash(cfg);
    return os.str();
  }
  bool rci_enabled() const { return !no_rci && problem.n() <= 3; }
  slsf::TubeConfig tube() const {
    return slsf::make_tube_config(problem, problem.K_f, cfg.tube_eps);
  }
  ExplicitSafeSet explicit_set() const {
    slsf::ExplicitOptions opt;
    opt.hyperbox = cfg.hyperbox;
    return slsf::synthesize(problem, opt);
  }
};

VectorXd parse_vector(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw Error(ErrorCode::kConfig, "cannot parse number '" + item + "'");
    }
  }
  return Eigen::Map<VectorXd>(vals.data(), static_cast<int>(vals.size()));
}

std::unique_ptr<SafetyFilter> make_filter(const Context& ctx, const std::string& method) {
  const auto settings = slsf::solver_settings(ctx.cfg);
  if (method == "sl") return std::make_unique<slsf::SlMpsf>(ctx.problem, settings);
  if (method == "tube") return std::make_unique<slsf::TubeFilter>(ctx.problem, ctx.tube(), settings);
  if (method == "nominal") return std::make_unique<slsf::NominalFilter>(ctx.problem, settings);
  if (method == "explicit")
    return std::make_unique<slsf::ExplicitFilter>(ctx.problem, ctx.explicit_set());
  if (method == "rci")
    return std::make_unique<slsf::RciFilter>(ctx.problem, slsf::rci_hull(ctx.explicit_set()),
                                             settings);
  throw Error(ErrorCode::kConfig, "unknown method '" + method + "'");
}

Json result_json(const slsf::FilterResult& r) {
  Json j;
  j["u_applied"] = slsf::io::vector_to_json(r.u_applied);
  j["u_learned"] = slsf::io::vector_to_json(r.u_learned);
  j["intervention"] = r.intervention;
  j["feasible"] = r.feasible;
  j["backup_engaged"] = r.backup_engaged;
  j["status"] = std::string(slsf::solver::to_string(r.status));
  j["iterations"] = r.iterations;
  j["solve_time_s"] = r.solve_time_s;
  j["total_time_s"] = r.total_time_s;
  if (r.z_plan.size() > 0) j["z_plan"] = slsf::io::to_json(r.z_plan);
  if (r.v_plan.size() > 0) j["v_plan"] = slsf::io::to_json(r.v_plan);
  return j;
}

Json sets_json(const Context& ctx) {
  const auto& p = ctx.problem;
  const slsf::TubeConfig tube = ctx.tube();
  Json j;
  j["seed"] = ctx.cfg.seed;
  j["config_hash"] = ctx.hash();
  j["K_f"] = slsf::io::to_json(p.K_f);
  j["X"] = slsf::io::to_json(p.X);
  j["U"] = slsf::io::to_json(p.U);
  j["omega_min"] = slsf::io::to_json(tube.tube);
  j["omega_max"] = slsf::io::to_json(p.terminal);
  j["pi_max"] = slsf::io::to_json(tube.terminal);
  j["X_tight"] = slsf::io::to_json(tube.X_tight);
  j["U_tight"] = slsf::io::to_json(tube.U_tight);
  if (ctx.rci_enabled()) {
    j["xi_max"] = slsf::io::to_json(
        poly::max_rci(p.A, p.B, p.U, p.X, p.B_w, p.disturbance_box()));
  }
  return j;
}

int cmd_sets(const Context& ctx, const std::string& out) {
  const std::string text = sets_json(ctx).dump(2) + "\n";
  if (out.empty())
    std::cout << text;
  else
    slsf::io::write_text(out, text);
  return kExitOk;
}

int cmd_synth(const Context& ctx) {
  Json sets = sets_json(ctx);
  const ExplicitSafeSet S = ctx.explicit_set();
  slsf::io::write_json(ctx.path("sets.json"), sets);
  slsf::io::write_json(ctx.path("explicit_safe_set.json"), slsf::io::to_json(S));
  slsf::io::write_text(ctx.path("config.yaml"), slsf::serialize_config(ctx.cfg));
  Json report;
  report["seed"] = ctx.cfg.seed;
  report["config_hash"] = ctx.hash();
  report["alpha"] = S.alpha;
  report["alpha_axes"] = slsf::io::vector_to_json(S.alpha_axes);
  report["center"] = slsf::io::vector_to_json(S.center());
  report["certificate_min_slack"] = slsf::certify(ctx.problem, S).min();
  report["rows"] = {{"omega_min", sets["omega_min"]["b"].size()},
                    {"omega_max", sets["omega_max"]["b"].size()},
                    {"pi_max", sets["pi_max"]["b"].size()}};
  if (sets.contains("xi_max")) report["rows"]["xi_max"] = sets["xi_max"]["b"].size();
  slsf::io::write_json(ctx.path("synth_report.json"), report);
  std::cout << "alpha* = " << S.alpha << "\nwrote " << ctx.out_dir << "\n";
  return kExitOk;
}

int cmd_synth_explicit(const Context& ctx, const std::string& out) {
  const ExplicitSafeSet S = ctx.explicit_set();
  Json j = slsf::io::to_json(S);
  j["seed"] = ctx.cfg.seed;
  j["config_hash"] = ctx.hash();
  slsf::io::write_json(out, j);
  std::cout << "alpha* = " << S.alpha << "\n";
  return kExitOk;
}

int cmd_filter(const Context& ctx, const std::string& state, const std::string& input,
               const std::string& batch) {
  auto f = make_filter(ctx, ctx.cfg.method);
  const int n = ctx.problem.n(), m = ctx.problem.m();
  if (batch.empty()) {
    const VectorXd x = parse_vector(state), u = parse_vector(input);
    if (x.size() != n || u.size() != m)
      throw Error(ErrorCode::kConfig, "state/input dimension does not match the problem");
    const auto r = f->filter(x, u);
    std::cout << result_json(r).dump(2) << "\n";
    return r.feasible ? kExitOk : kExitInfeasible;
  }
  std::ifstream in(batch);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open " + batch);
  Json all = Json::array();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    if (line_no == 1 && line.find_first_of("xu") != std::string::npos) continue;  // header
    const VectorXd row = parse_vector(line);
    if (row.size() != n + m)
      throw Error(ErrorCode::kConfig, "line " + std::to_string(line_no) + ": expected " +
                                          std::to_string(n + m) + " columns");
    f->reset();
    all.push_back(result_json(f->filter(row.head(n), row.tail(m))));
  }
  std::cout << all.dump(2) << "\n";
  return kExitOk;
}

slsf::Policy make_policy(const Context& ctx, const std::string& name) {
  if (name == "adversarial") return sim::adversarial_policy(ctx.problem, 1.0, ctx.cfg.seed + 11);
  if (name == "random") return sim::random_policy(ctx.problem, 2.0, ctx.cfg.seed + 11);
  if (name == "lqr") return sim::linear_policy(ctx.problem.K_f);
  if (name == "zero") return sim::constant_policy(VectorXd::Zero(ctx.problem.m()));
  throw Error(ErrorCode::kConfig, "unknown policy '" + name + "'");
}

int cmd_simulate(const Context& ctx, const std::string& policy_name,
                 const std::string& disturbance) {
  auto f = make_filter(ctx, ctx.cfg.method);
  const auto kind = sim::parse_disturbance_kind(disturbance);
  const auto policy = make_policy(ctx, policy_name);
  const auto x0s = sim::sample_states(
      ctx.problem, [&](const VectorXd& x) { f->reset(); return f->is_feasible(x); },
      ctx.cfg.episodes, ctx.cfg.seed);
  int violations = 0, backup_steps = 0;
  double total_intervention = 0.0, max_intervention = 0.0;
  for (int e = 0; e < ctx.cfg.episodes; ++e) {
    f->reset();
    const auto w = sim::make_disturbance(kind, ctx.problem.n_w(), ctx.cfg.seed + 1000 + e);
    const sim::Episode ep = sim::run_episode(*f, ctx.problem, policy, w, x0s[e], ctx.cfg.steps);
    violations += ep.violations();
    for (bool b : ep.backup_engaged) backup_steps += b ? 1 : 0;
    total_intervention += ep.interventions.sum();
    if (ep.interventions.size() > 0)
      max_intervention = std::max(max_intervention, ep.interventions.maxCoeff());
    if (e == 0) {
      std::ofstream os(ctx.path("episode_0.csv"));
      sim::write_episode_csv(os, ep);
    }
  }
  Json s;
  s["seed"] = ctx.cfg.seed;
  s["config_hash"] = ctx.hash();
  s["method"] = ctx.cfg.method;
  s["policy"] = policy_name;
  s["disturbance"] = disturbance;
  s["episodes"] = ctx.cfg.episodes;
  s["steps"] = ctx.cfg.steps;
  s["violations"] = violations;
  s["backup_steps"] = backup_steps;
  const int steps = std::max(1, ctx.cfg.episodes * ctx.cfg.steps);
  s["mean_intervention"] = total_intervention / steps;
  s["max_intervention"] = max_intervention;
  slsf::io::write_json(ctx.path("simulate_summary.json"), s);
  std::cout << ctx.cfg.method << ": " << ctx.cfg.episodes << " episodes, " << violations
            << " violations\n";
  return kExitOk;
}

struct Check {
  std::string name;
  bool ok;
  std::string detail;
};

int cmd_reproduce(Context& ctx, int grid_override, int timing_override) {
  if (grid_override > 0) ctx.cfg.grid = grid_override;
  if (timing_override >= 0) ctx.cfg.timing_samples = timing_override;
  const auto& p = ctx.problem;
  const auto settings = slsf::solver_settings(ctx.cfg);
  const slsf::TubeConfig tube = ctx.tube();
  const ExplicitSafeSet S = ctx.explicit_set();

  sim::GridStudy study;
  study.grid = sim::GridSpec::over(p.X, ctx.cfg.grid);
  std::cerr << "grid " << study.grid.size() << " cells\n";
  study.methods.push_back(sim::intervention_map(
      "tube", [&] { return std::make_unique<slsf::TubeFilter>(p, tube, settings); }, p,
      study.grid));
  study.methods.push_back(sim::intervention_map(
      "sl", [&] { return std::make_unique<slsf::SlMpsf>(p, settings); }, p, study.grid));
  study.methods.push_back(sim::membership_map("explicit", S.box(), study.grid));
  study.methods.push_back(sim::membership_map("omega_max", p.terminal, study.grid));
  const bool rci = ctx.rci_enabled();
  if (rci) {
    study.methods.push_back(sim::membership_map(
        "xi_max", poly::max_rci(p.A, p.B, p.U, p.X, p.B_w, p.disturbance_box()), study.grid));
  }
  const std::string ref = rci ? "xi_max" : "";
  auto cover = [&](const std::string& name) {
    if (rci) return study.coverage(name, ref);
    return static_cast<double>(study.find(name)->count()) / study.grid.size();
  };

  std::vector<Check> checks;
  {
    const int ce = study.counterexamples("tube", "sl");
    checks.push_back({"tube safe set inside SL safe set", ce == 0,
                      std::to_string(ce) + " counterexample cells"});
    const double ct = cover("tube"), cs = cover("sl");
    std::ostringstream d;
    d << "coverage sl " << cs << ", tube " << ct;
    checks.push_back({"SL coverage exceeds tube coverage by 0.05", cs >= ct + 0.05, d.str()});
  }
  {
    const auto& e = study.find("explicit")->feasible;
    const auto& om = study.find("omega_max")->feasible;
    const auto& tb = study.find("tube")->feasible;
    int outside = 0, om_not_e = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] && !om[i] && !tb[i]) ++outside;
      if (om[i] && !e[i]) ++om_not_e;
    }
    checks.push_back({"explicit set covers cells outside omega_max and tube set", outside > 0,
                      std::to_string(outside) + " cells"});
    checks.push_back({"omega_max not contained in explicit set", om_not_e > 0,
                      std::to_string(om_not_e) + " cells"});
  }
  const auto iv = sim::compare_interventions(*study.find("sl"), *study.find("tube"));
  {
    std::ostringstream d;
    d << "mean sl " << iv.mean_a << " tube " << iv.mean_b << ", max sl " << iv.max_a << " tube "
      << iv.max_b << ", cells sl>tube " << iv.cells_a_above_b << "/" << iv.cells;
    const bool ok = iv.mean_a <= iv.mean_b + 1e-4 && iv.max_a <= iv.max_b + 1e-4 &&
                    iv.cells_a_above_b <= 0.01 * iv.cells;
    checks.push_back({"SL intervention not above tube intervention", ok, d.str()});
  }

  std::vector<sim::TimingStats> timing;
  if (ctx.cfg.timing_samples > 0) {
    slsf::SlMpsf sl(p, settings);
    slsf::TubeFilter tf(p, tube, settings);
    timing = sim::timing_bench(
        {sim::timed_filter(tf), sim::timed_filter(sl), sim::timed_explicit_check(S, p)}, p,
        ctx.cfg.timing_samples, ctx.cfg.seed);
    auto med = [&](const std::string& n) {
      for (const auto& t : timing)
        if (t.method == n) return t.median_s;
      return std::nan("");
    };
    std::ostringstream d;
    d << "median explicit " << med("explicit") << " s, tube " << med("tube") << " s, sl "
      << med("sl") << " s";
    checks.push_back({"explicit check 100x faster than SL", med("explicit") <= 1e-2 * med("sl"),
                      d.str()});
    checks.push_back({"tube solve faster than SL", med("tube") <= med("sl"), d.str()});
  }

  {
    std::ofstream os(ctx.path("grid.csv"));
    sim::write_grid_csv(os, study);
  }
  {
    std::ofstream os(ctx.path("timing.csv"));
    sim::write_timing_csv(os, timing);
  }
  Json plot;
  {
    const auto pts = study.grid.points();
    Json xs = Json::array();
    for (const auto& x : pts) xs.push_back(slsf::io::vector_to_json(x));
    plot["points"] = xs;
    plot["counts"] = study.grid.counts;
    for (const auto& mg : study.methods) {
      Json feas = Json::array(), inter = Json::array();
      for (std::size_t i = 0; i < mg.feasible.size(); ++i) {
        feas.push_back(static_cast<int>(mg.feasible[i]));
        if (std::isnan(mg.max_intervention[i]))
          inter.push_back(nullptr);
        else
          inter.push_back(mg.max_intervention[i]);
      }
      plot["methods"][mg.name] = {{"feasible", feas}, {"max_intervention", inter}};
    }
  }
  slsf::io::write_json(ctx.path("plot_data.json"), plot);

  Json summary;
  summary["seed"] = ctx.cfg.seed;
  summary["config_hash"] = ctx.hash();
  summary["grid"] = study.grid.size();
  summary["alpha"] = S.alpha;
  for (const auto& mg : study.methods) {
    summary["cells"][mg.name] = mg.count();
    summary["coverage"][mg.name] = cover(mg.name);
  }
  summary["intervention"] = {{"cells", iv.cells},       {"mean_sl", iv.mean_a},
                             {"max_sl", iv.max_a},      {"mean_tube", iv.mean_b},
                             {"max_tube", iv.max_b},    {"cells_sl_above_tube", iv.cells_a_above_b}};
  for (const auto& t : timing)
    summary["timing"][t.method] = {{"samples", t.samples}, {"mean_s", t.mean_s}, {"std_s", t.std_s},
                                   {"median_s", t.median_s}, {"median_total_s", t.median_total_s}};
  bool all_ok = true;
  for (const auto& c : checks) {
    summary["checks"][c.name] = {{"ok", c.ok}, {"detail", c.detail}};
    all_ok = all_ok && c.ok;
  }
  summary["all_orderings_hold"] = all_ok;
  slsf::io::write_json(ctx.path("summary.json"), summary);

  std::ostringstream md;
  md << "# Double integrator study\n\n";
  md << "- seed: " << ctx.cfg.seed << "\n- config hash: " << ctx.hash() << "\n- grid: "
     << study.grid.size() << " cells\n- alpha*: " << S.alpha << "\n\n";
  md << "## Safe set size\n\n| set | cells | coverage |\n|---|---|---|\n";
  for (const auto& mg : study.methods)
    md << "| " << mg.name << " | " << mg.count() << " | " << cover(mg.name) << " |\n";
  md << "\n## Maximal intervention (jointly feasible cells: " << iv.cells << ")\n\n";
  md << "| method | mean | max |\n|---|---|---|\n";
  md << "| sl | " << iv.mean_a << " | " << iv.max_a << " |\n";
  md << "| tube | " << iv.mean_b << " | " << iv.max_b << " |\n";
  if (!timing.empty()) {
    md << "\n## Computation time\n\n| method | samples | mean [s] | std [s] | median [s] |\n"
          "|---|---|---|---|---|\n";
    for (const auto& t : timing)
      md << "| " << t.method << " | " << t.samples << " | " << t.mean_s << " | " << t.std_s
         << " | " << t.median_s << " |\n";
  }
  md << "\n## Orderings\n\n";
  for (const auto& c : checks)
    md << "- " << (c.ok ? "OK" : "BROKEN") << ": " << c.name << " (" << c.detail << ")\n";
  slsf::io::write_text(ctx.path("report.md"), md.str());

  for (const auto& c : checks)
    std::cout << (c.ok ? "OK     " : "BROKEN ") << c.name << ": " << c.detail << "\n";
  std::cout << "wrote " << ctx.out_dir << "\n";
  return kExitOk;
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
    case ErrorCode::kNotStabilizable:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kDimensionTooLarge:
      return kExitConfig;
    default:
      return kExitInfeasible;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictive safety filters for constrained linear systems"};
  app.require_subcommand(1);
  Context ctx;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config,--problem", ctx.config, "YAML problem file (default: built-in example)");
    sub->add_option("--out-dir", ctx.out_dir, "Output directory");
    sub->add_option("--method", ctx.method, "sl | tube | nominal | explicit | rci");
    sub->add_flag("--no-rci", ctx.no_rci, "Skip the maximal robust control invariant set");
  };

  auto* synth = app.add_subcommand("synth", "Compute sets and the explicit safe set");
  common(synth);

  std::string out;
  auto* synth_explicit = app.add_subcommand("synth-explicit", "Write the explicit safe set as JSON");
  common(synth_explicit);
  synth_explicit->add_option("--out", out, "Output file")->required();

  auto* sets = app.add_subcommand("sets", "Print invariant sets as JSON");
  common(sets);
  sets->add_option("--out", out, "Output file (default: stdout)");

  std::string state, input, batch;
  auto* filter = app.add_subcommand("filter", "Filter one learned input or a CSV batch");
  common(filter);
  filter->add_option("--state", state, "Comma separated state");
  filter->add_option("--input", input, "Comma separated learned input");
  filter->add_option("--batch", batch, "CSV with rows x1..xn,u1..um");

  std::string policy = "adversarial", disturbance = "vertex";
  int episodes = -1, steps = -1;
  auto* simulate = app.add_subcommand("simulate", "Closed-loop episodes");
  common(simulate);
  simulate->add_option("--policy", policy, "adversarial | random | lqr | zero");
  simulate->add_option("--disturbance", disturbance, "vertex | uniform | zero | mixed");
  simulate->add_option("--episodes", episodes, "Number of episodes");
  simulate->add_option("--steps", steps, "Steps per episode");

  int grid = 0, timing_samples = -1;
  auto* reproduce = app.add_subcommand("reproduce", "Grid study, interventions and timings");
  common(reproduce);
  reproduce->add_option("--grid", grid, "Cells per axis");
  reproduce->add_option("--timing-samples", timing_samples, "Timing samples (0 skips timing)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    ctx.load();
    if (*synth) return cmd_synth(ctx);
    if (*synth_explicit) return cmd_synth_explicit(ctx, out);
    if (*sets) return cmd_sets(ctx, out);
    if (*filter) {
      if (batch.empty() && (state.empty() || input.empty()))
        throw Error(ErrorCode::kConfig, "filter needs --state and --input, or --batch");
      return cmd_filter(ctx, state, input, batch);
    }
    if (*simulate) {
      if (episodes >= 0) ctx.cfg.episodes = episodes;
      if (steps >= 0) ctx.cfg.steps = steps;
      return cmd_simulate(ctx, policy, disturbance);
    }
    if (*reproduce) return cmd_reproduce(ctx, grid, timing_samples);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  }
  return kExitOk;
}
