#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run(const std::string& args) {
  const std::string cmd = std::string(SLSF_CLI_PATH) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::path(::testing::TempDir()) / ("slsf_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

GTEST_TEST(CliTest, SynthIsByteIdentical) {
  const fs::path a = scratch("synth_a"), b = scratch("synth_b");
  ASSERT_EQ(run("synth --out-dir " + a.string()).code, 0);
  ASSERT_EQ(run("synth --out-dir " + b.string()).code, 0);
  for (const char* f : {"sets.json", "explicit_safe_set.json", "config.yaml", "synth_report.json"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const Json report = Json::parse(slurp(a / "synth_report.json"));
  EXPECT_NEAR(report.at("alpha").get<double>(), 3.1, 1e-6);
  // The written config reproduces the same run.
  const fs::path c = scratch("synth_c");
  ASSERT_EQ(run("synth --config " + (a / "config.yaml").string() + " --out-dir " + c.string()).code, 0);
  EXPECT_EQ(slurp(a / "explicit_safe_set.json"), slurp(c / "explicit_safe_set.json"));
}

GTEST_TEST(CliTest, SynthExplicitAndSets) {
  const fs::path d = scratch("explicit");
  ASSERT_EQ(run("synth-explicit --out " + (d / "S.json").string()).code, 0);
  const Json S = Json::parse(slurp(d / "S.json"));
  EXPECT_GT(S.at("alpha").get<double>(), 0.0);
  const CliRun sets = run("sets --no-rci");
  ASSERT_EQ(sets.code, 0);
  const Json j = Json::parse(sets.out);
  EXPECT_TRUE(j.contains("omega_max"));
  EXPECT_EQ(run("synth-explicit").code, 2);
}

GTEST_TEST(CliTest, FilterSingleAndBatch) {
  const CliRun r = run("filter --state 0,0 --input 10");
  ASSERT_EQ(r.code, 0);
  const Json j = Json::parse(r.out);
  EXPECT_TRUE(j.at("feasible").get<bool>());
  EXPECT_GE(j.at("intervention").get<double>(), 7.0 - 1e-6);
  EXPECT_LE(j.at("u_applied")[0].get<double>(), 3.0);

  EXPECT_EQ(run("filter --state 5,5 --input 0").code, 1);
  EXPECT_EQ(run("filter --state 0,0,0 --input 1").code, 2);

  const fs::path d = scratch("batch");
  std::ofstream(d / "in.csv") << "0,0,1\n1,0.5,-2\n";
  const CliRun b = run("filter --method tube --batch " + (d / "in.csv").string());
  ASSERT_EQ(b.code, 0);
  EXPECT_NE(b.out.find("\"feasible\": true"), std::string::npos);

  for (const char* m : {"nominal", "explicit", "rci"})
    EXPECT_EQ(run(std::string("filter --method ") + m + " --state 0,0 --input 0").code, 0) << m;
}

GTEST_TEST(CliTest, SimulateWritesSummary) {
  const fs::path d = scratch("sim");
  ASSERT_EQ(run("simulate --method explicit --episodes 3 --steps 20 --out-dir " + d.string()).code, 0);
  const Json s = Json::parse(slurp(d / "simulate_summary.json"));
  EXPECT_EQ(s.at("violations").get<int>(), 0);
  EXPECT_EQ(s.at("episodes").get<int>(), 3);
  const std::string csv = slurp(d / "episode_0.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x1,x2,u1,uL1,intervention,backup");
  EXPECT_EQ(run("simulate --policy bogus --out-dir " + d.string()).code, 2);
}

GTEST_TEST(CliTest, ConfigErrorsExitWithTwo) {
  const fs::path d = scratch("cfg");
  std::ofstream(d / "bad.yaml") << "horizon: 10\nfoo: 1\n";
  std::ofstream(d / "unstab.yaml") << "system:\n  B: [[0], [0]]\n";
  EXPECT_EQ(run("synth --config " + (d / "bad.yaml").string() + " --out-dir " + d.string()).code, 2);
  EXPECT_EQ(run("synth --config " + (d / "unstab.yaml").string() + " --out-dir " + d.string()).code, 2);
  EXPECT_EQ(run("synth --config /nonexistent.yaml").code, 2);
  EXPECT_EQ(run("synth --method magic").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
}

GTEST_TEST(CliTest, SmallReproduce) {
  const fs::path d = scratch("rep");
  const CliRun r = run("reproduce --grid 6 --timing-samples 20 --out-dir " + d.string());
  ASSERT_EQ(r.code, 0);
  for (const char* f : {"grid.csv", "timing.csv", "plot_data.json", "summary.json", "report.md"})
    EXPECT_TRUE(fs::exists(d / f)) << f;
  const Json s = Json::parse(slurp(d / "summary.json"));
  EXPECT_EQ(s.at("grid").get<int>(), 36);
  EXPECT_TRUE(s.contains("checks"));
  const std::string grid = slurp(d / "grid.csv");
  EXPECT_EQ(std::count(grid.begin(), grid.end(), '\n'), 37);
}

}  // namespace
