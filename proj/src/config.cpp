#include "slsf/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "slsf/baseline_mpsf.hpp"
#include "slsf/error.hpp"

namespace slsf {

namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& msg) {
  const auto mark = node.Mark();
  std::ostringstream os;
  if (mark.line >= 0) os << "line " << mark.line + 1 << ": ";
  os << msg;
  throw Error(ErrorCode::kConfig, os.str());
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& what) {
  if (!node.IsScalar()) fail(node, what + " must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(node, "cannot read " + what);
  }
}

VectorXd vector(const YAML::Node& node, const std::string& what) {
  if (!node.IsSequence()) fail(node, what + " must be a sequence");
  VectorXd v(static_cast<int>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) v(static_cast<int>(i)) = scalar<double>(node[i], what);
  return v;
}

MatrixXd matrix(const YAML::Node& node, const std::string& what) {
  if (!node.IsSequence() || node.size() == 0) fail(node, what + " must be a non-empty list of rows");
  const int rows = static_cast<int>(node.size());
  int cols = -1;
  MatrixXd M;
  for (int r = 0; r < rows; ++r) {
    const VectorXd row = vector(node[r], what + " row");
    if (cols < 0) {
      cols = static_cast<int>(row.size());
      M.resize(rows, cols);
    }
    if (row.size() != cols) fail(node[r], what + " rows have different lengths");
    M.row(r) = row.transpose();
  }
  return M;
}

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!node.IsMap()) fail(node, where + " must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in " + where);
  }
}

// {box: [h...]} or {A: [[...]], b: [...]}
void constraint_set(const YAML::Node& node, const std::string& what, MatrixXd* A, VectorXd* b) {
  check_keys(node, {"box", "A", "b"}, what);
  if (node["box"]) {
    if (node["A"] || node["b"]) fail(node, what + ": give either box or A/b");
    const VectorXd h = vector(node["box"], what + ".box");
    if ((h.array() <= 0.0).any()) fail(node["box"], what + ".box entries must be positive");
    const int n = static_cast<int>(h.size());
    A->resize(2 * n, n);
    *A << MatrixXd::Identity(n, n), -MatrixXd::Identity(n, n);
    b->resize(2 * n);
    *b << h, h;
    return;
  }
  if (!node["A"] || !node["b"]) fail(node, what + " needs box or both A and b");
  *A = matrix(node["A"], what + ".A");
  *b = vector(node["b"], what + ".b");
  if (A->rows() != b->size()) fail(node["b"], what + ".b length does not match A");
}

void emit_matrix(YAML::Emitter& out, const MatrixXd& M) {
  out << YAML::Flow << YAML::BeginSeq;
  for (int r = 0; r < M.rows(); ++r) {
    out << YAML::Flow << YAML::BeginSeq;
    for (int c = 0; c < M.cols(); ++c) out << M(r, c);
    out << YAML::EndSeq;
  }
  out << YAML::EndSeq;
}

void emit_vector(YAML::Emitter& out, const VectorXd& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (int i = 0; i < v.size(); ++i) out << v(i);
  out << YAML::EndSeq;
}

bool same(const MatrixXd& a, const MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

}  // namespace

ProblemConfig ProblemConfig::defaults() {
  ProblemConfig c;
  c.A.resize(2, 2);
  c.A << 1, 1, 0, 1;
  c.B.resize(2, 1);
  c.B << 0.5, 1;
  c.B_w = 0.3 * MatrixXd::Identity(2, 2);
  c.X_A.resize(4, 2);
  c.X_A << MatrixXd::Identity(2, 2), -MatrixXd::Identity(2, 2);
  c.X_b = VectorXd::Constant(4, 5.0);
  c.U_A.resize(2, 1);
  c.U_A << 1, -1;
  c.U_b = VectorXd::Constant(2, 3.0);
  c.w_box = VectorXd::Ones(2);
  c.N = 10;
  c.Q = MatrixXd::Identity(2, 2);
  c.R = MatrixXd::Constant(1, 1, 100.0);
  return c;
}

bool ProblemConfig::operator==(const ProblemConfig& o) const {
  return same(A, o.A) && same(B, o.B) && same(B_w, o.B_w) && same(X_A, o.X_A) &&
         same(X_b, o.X_b) && same(U_A, o.U_A) && same(U_b, o.U_b) && same(w_box, o.w_box) &&
         N == o.N && same(Q, o.Q) && same(R, o.R) && method == o.method &&
         eps_abs == o.eps_abs && eps_rel == o.eps_rel && max_iter == o.max_iter &&
         seed == o.seed && grid == o.grid && timing_samples == o.timing_samples &&
         episodes == o.episodes && steps == o.steps && tube_eps == o.tube_eps &&
         hyperbox == o.hyperbox;
}

ProblemConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream os;
    os << "line " << e.mark.line + 1 << ": " << e.msg;
    throw Error(ErrorCode::kConfig, os.str());
  }
  ProblemConfig c = ProblemConfig::defaults();
  if (root.IsNull()) return c;
  check_keys(root,
             {"system", "constraints", "disturbance", "horizon", "lqr", "method", "solver",
              "seed", "study", "tube", "explicit"},
             "config");

  if (const auto sys = root["system"]) {
    check_keys(sys, {"A", "B", "B_w"}, "system");
    if (sys["A"]) c.A = matrix(sys["A"], "system.A");
    if (sys["B"]) c.B = matrix(sys["B"], "system.B");
    if (sys["B_w"]) c.B_w = matrix(sys["B_w"], "system.B_w");
    if (c.A.rows() != c.A.cols()) fail(sys["A"] ? sys["A"] : sys, "system.A must be square");
    if (c.B.rows() != c.A.rows()) fail(sys["B"] ? sys["B"] : sys, "system.B row count");
    if (c.B_w.rows() != c.A.rows()) fail(sys["B_w"] ? sys["B_w"] : sys, "system.B_w row count");
    if (!sys["B_w"] && c.B_w.rows() != c.A.rows()) c.B_w = MatrixXd::Identity(c.A.rows(), c.A.rows());
  }
  const int n = static_cast<int>(c.A.rows()), m = static_cast<int>(c.B.cols());
  if (const auto cons = root["constraints"]) {
    check_keys(cons, {"state", "input"}, "constraints");
    if (cons["state"]) constraint_set(cons["state"], "constraints.state", &c.X_A, &c.X_b);
    if (cons["input"]) constraint_set(cons["input"], "constraints.input", &c.U_A, &c.U_b);
    if (c.X_A.cols() != n) fail(cons, "state constraints do not match the state dimension");
    if (c.U_A.cols() != m) fail(cons, "input constraints do not match the input dimension");
  }
  if (const auto d = root["disturbance"]) {
    check_keys(d, {"box"}, "disturbance");
    c.w_box = vector(d["box"], "disturbance.box");
    if ((c.w_box.array() < 0.0).any()) fail(d["box"], "disturbance.box entries must be >= 0");
  }
  if (c.w_box.size() != c.B_w.cols()) {
    if (root["disturbance"]) fail(root["disturbance"], "disturbance.box length must equal B_w columns");
    c.w_box = VectorXd::Ones(c.B_w.cols());
  }
  if (const auto h = root["horizon"]) {
    c.N = scalar<int>(h, "horizon");
    if (c.N < 1) fail(h, "horizon must be positive");
  }
  if (const auto l = root["lqr"]) {
    check_keys(l, {"Q", "R"}, "lqr");
    if (l["Q"]) c.Q = matrix(l["Q"], "lqr.Q");
    if (l["R"]) c.R = matrix(l["R"], "lqr.R");
  }
  if (c.Q.rows() != n || c.Q.cols() != n) fail(root["lqr"] ? root["lqr"] : root, "lqr.Q must be n x n");
  if (c.R.rows() != m || c.R.cols() != m) fail(root["lqr"] ? root["lqr"] : root, "lqr.R must be m x m");
  if (const auto me = root["method"]) {
    c.method = scalar<std::string>(me, "method");
    static const std::set<std::string> methods{"sl", "tube", "nominal", "explicit", "rci"};
    if (!methods.count(c.method)) fail(me, "method must be one of sl, tube, nominal, explicit, rci");
  }
  if (const auto s = root["solver"]) {
    check_keys(s, {"eps_abs", "eps_rel", "max_iter"}, "solver");
    if (s["eps_abs"]) c.eps_abs = scalar<double>(s["eps_abs"], "solver.eps_abs");
    if (s["eps_rel"]) c.eps_rel = scalar<double>(s["eps_rel"], "solver.eps_rel");
    if (s["max_iter"]) c.max_iter = scalar<int>(s["max_iter"], "solver.max_iter");
    if (c.eps_abs < 0 || c.eps_rel < 0 || c.max_iter < 1) fail(s, "solver tolerances out of range");
  }
  if (const auto s = root["seed"]) c.seed = scalar<std::uint64_t>(s, "seed");
  if (const auto st = root["study"]) {
    check_keys(st, {"grid", "timing_samples", "episodes", "steps"}, "study");
    if (st["grid"]) c.grid = scalar<int>(st["grid"], "study.grid");
    if (st["timing_samples"]) c.timing_samples = scalar<int>(st["timing_samples"], "study.timing_samples");
    if (st["episodes"]) c.episodes = scalar<int>(st["episodes"], "study.episodes");
    if (st["steps"]) c.steps = scalar<int>(st["steps"], "study.steps");
    if (c.grid < 1 || c.timing_samples < 0 || c.episodes < 0 || c.steps < 0)
      fail(st, "study sizes out of range");
  }
  if (const auto t = root["tube"]) {
    check_keys(t, {"eps"}, "tube");
    c.tube_eps = scalar<double>(t["eps"], "tube.eps");
    if (c.tube_eps <= 0.0) fail(t["eps"], "tube.eps must be positive");
  }
  if (const auto e = root["explicit"]) {
    check_keys(e, {"hyperbox"}, "explicit");
    c.hyperbox = scalar<bool>(e["hyperbox"], "explicit.hyperbox");
  }
  return c;
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ProblemConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "system" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "A" << YAML::Value;
  emit_matrix(out, c.A);
  out << YAML::Key << "B" << YAML::Value;
  emit_matrix(out, c.B);
  out << YAML::Key << "B_w" << YAML::Value;
  emit_matrix(out, c.B_w);
  out << YAML::EndMap;
  out << YAML::Key << "constraints" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "state" << YAML::Value << YAML::BeginMap << YAML::Key << "A" << YAML::Value;
  emit_matrix(out, c.X_A);
  out << YAML::Key << "b" << YAML::Value;
  emit_vector(out, c.X_b);
  out << YAML::EndMap;
  out << YAML::Key << "input" << YAML::Value << YAML::BeginMap << YAML::Key << "A" << YAML::Value;
  emit_matrix(out, c.U_A);
  out << YAML::Key << "b" << YAML::Value;
  emit_vector(out, c.U_b);
  out << YAML::EndMap << YAML::EndMap;
  out << YAML::Key << "disturbance" << YAML::Value << YAML::BeginMap << YAML::Key << "box"
      << YAML::Value;
  emit_vector(out, c.w_box);
  out << YAML::EndMap;
  out << YAML::Key << "horizon" << YAML::Value << c.N;
  out << YAML::Key << "lqr" << YAML::Value << YAML::BeginMap << YAML::Key << "Q" << YAML::Value;
  emit_matrix(out, c.Q);
  out << YAML::Key << "R" << YAML::Value;
  emit_matrix(out, c.R);
  out << YAML::EndMap;
  out << YAML::Key << "method" << YAML::Value << c.method;
  out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "eps_abs" << YAML::Value << c.eps_abs;
  out << YAML::Key << "eps_rel" << YAML::Value << c.eps_rel;
  out << YAML::Key << "max_iter" << YAML::Value << c.max_iter;
  out << YAML::EndMap;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "study" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "grid" << YAML::Value << c.grid;
  out << YAML::Key << "timing_samples" << YAML::Value << c.timing_samples;
  out << YAML::Key << "episodes" << YAML::Value << c.episodes;
  out << YAML::Key << "steps" << YAML::Value << c.steps;
  out << YAML::EndMap;
  out << YAML::Key << "tube" << YAML::Value << YAML::BeginMap << YAML::Key << "eps" << YAML::Value
      << c.tube_eps << YAML::EndMap;
  out << YAML::Key << "explicit" << YAML::Value << YAML::BeginMap << YAML::Key << "hyperbox"
      << YAML::Value << c.hyperbox << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::uint64_t config_hash(const ProblemConfig& cfg) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : serialize_config(cfg)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

solver::Settings solver_settings(const ProblemConfig& cfg) {
  solver::Settings s;
  s.eps_abs = cfg.eps_abs;
  s.eps_rel = cfg.eps_rel;
  s.max_iter = cfg.max_iter;
  return solver::Settings::from_env(s);
}

SafetyProblem build_problem(const ProblemConfig& cfg) {
  SafetyProblem p;
  p.A = cfg.A;
  p.B = cfg.B;
  p.B_w = cfg.B_w * cfg.w_box.asDiagonal();
  p.X = poly::Polytope(cfg.X_A, cfg.X_b);
  p.U = poly::Polytope(cfg.U_A, cfg.U_b);
  p.N = cfg.N;
  p.validate(false);
  p.K_f = lqr(p.A, p.B, cfg.Q, cfg.R);
  const int n = p.n();
  MatrixXd J(p.X.num_rows() + p.U.num_rows(), n);
  VectorXd jb(J.rows());
  J << p.X.A(), p.U.A() * p.K_f;
  jb << p.X.b(), p.U.b();
  p.terminal = poly::max_rpi(p.A + p.B * p.K_f, poly::Polytope(J, jb), p.B_w, p.disturbance_box());
  p.validate(true);
  return p;
}

}  // namespace slsf
