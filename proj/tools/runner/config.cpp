#include "runner/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "critvar/coefficients.hpp"

namespace critvar::runner {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& origin, const std::string& path, const YAML::Node& node,
                       const std::string& what) {
  std::ostringstream os;
  os << origin;
  if (node.IsDefined() && node.Mark().line >= 0) os << ":" << node.Mark().line + 1;
  os << ": " << (path.empty() ? std::string("config") : path) << ": " << what;
  throw Error(ErrorCode::config_parse_error, os.str());
}

// Scalars become integers, reals or booleans when they read as such.
json to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Sequence: {
      json a = json::array();
      for (const auto& x : node) a.push_back(to_json(x));
      return a;
    }
    case YAML::NodeType::Map: {
      json o = json::object();
      for (const auto& kv : node) o[kv.first.as<std::string>()] = to_json(kv.second);
      return o;
    }
    case YAML::NodeType::Scalar: {
      const std::string s = node.Scalar();
      static const std::regex integer(R"([+-]?[0-9]+)");
      if (std::regex_match(s, integer)) {
        try {
          return std::stoll(s);
        } catch (const std::out_of_range&) {
        }
      }
      double d = 0.0;
      if (YAML::convert<double>::decode(node, d)) return d;
      if (s == "true") return true;
      if (s == "false") return false;
      return s;
    }
    default:
      return nullptr;
  }
}

class Reader {
 public:
  Reader(std::string origin) : origin_(std::move(origin)) {}

  void keys(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) const {
    if (!node.IsMap()) fail(origin_, path, node, "expected a mapping");
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      if (!allowed.count(key)) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        fail(origin_, join(path, key), kv.first, "unknown key (expected one of: " + list + ")");
      }
    }
  }

  double real(const YAML::Node& node, const std::string& path) const {
    double d = 0.0;
    if (!node.IsScalar() || !YAML::convert<double>::decode(node, d) || !std::isfinite(d))
      fail(origin_, path, node, "expected a finite number");
    return d;
  }

  long integer(const YAML::Node& node, const std::string& path) const {
    long v = 0;
    if (!node.IsScalar() || !YAML::convert<long>::decode(node, v)) fail(origin_, path, node, "expected an integer");
    return v;
  }

  bool boolean(const YAML::Node& node, const std::string& path) const {
    bool v = false;
    if (!node.IsScalar() || !YAML::convert<bool>::decode(node, v)) fail(origin_, path, node, "expected true or false");
    return v;
  }

  std::string text(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) fail(origin_, path, node, "expected a string");
    return node.Scalar();
  }

  std::vector<double> list(const YAML::Node& node, const std::string& path) const {
    if (!node.IsSequence()) fail(origin_, path, node, "expected a list of numbers");
    if (node.size() == 0) fail(origin_, path, node, "list must not be empty");
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i) out.push_back(real(node[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

  [[noreturn]] void error(const YAML::Node& node, const std::string& path, const std::string& what) const {
    fail(origin_, path, node, what);
  }

  static std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

 private:
  std::string origin_;
};

const std::set<std::string> kExperiments = {"verify-groundstate", "hardy",    "thresholds",    "pohozaev-audit",
                                            "solve",              "multiplicity", "concentration", "hypotheses"};

PresetRef read_preset(const Reader& in, const YAML::Node& node, const std::string& path) {
  PresetRef p;
  if (node.IsScalar()) {
    p.preset = node.Scalar();
    return p;
  }
  in.keys(node, path, {"preset", "params"});
  if (!node["preset"]) in.error(node, path, "missing 'preset'");
  p.preset = in.text(node["preset"], path + ".preset");
  if (node["params"]) {
    if (!node["params"].IsMap()) in.error(node["params"], path + ".params", "expected a mapping");
    p.params = to_json(node["params"]);
  }
  return p;
}

ExperimentConfig read(const YAML::Node& root, const std::string& origin) {
  const Reader in(origin);
  ExperimentConfig c;
  in.keys(root, "", {"experiment", "problem", "grid", "solver", "init", "random", "sweep", "output"});

  if (root["experiment"]) {
    c.experiment = in.text(root["experiment"], "experiment");
    if (!kExperiments.count(c.experiment)) in.error(root["experiment"], "experiment", "unknown experiment '" + c.experiment + "'");
  }

  const YAML::Node problem = root["problem"];
  if (!problem) in.error(root, "problem", "missing block");
  in.keys(problem, "problem", {"N", "A", "lambda", "A_over_Lambda", "lambda_over_Lambda", "h", "k"});
  if (!problem["N"]) in.error(problem, "problem.N", "missing");
  const long N = in.integer(problem["N"], "problem.N");
  if (N < 3 || N > 64) in.error(problem["N"], "problem.N", "must lie in [3, 64]");
  c.N = static_cast<int>(N);
  const double Lambda = hardy_constant(c.N);
  int given = 0;
  for (const char* key : {"A", "lambda", "A_over_Lambda", "lambda_over_Lambda"}) {
    if (!problem[key]) continue;
    ++given;
    const std::string k = key;
    const double v = in.real(problem[key], "problem." + k);
    c.coupling_name = k.rfind("lambda", 0) == 0 ? "lambda" : "A";
    c.coupling = k.find("_over_") != std::string::npos ? v * Lambda : v;
  }
  if (given > 1) in.error(problem, "problem", "give only one of A, lambda, A_over_Lambda, lambda_over_Lambda");
  if (problem["h"]) c.h = read_preset(in, problem["h"], "problem.h");
  if (problem["k"]) c.k = read_preset(in, problem["k"], "problem.k");
  try {
    make_h_preset(c.h.preset, c.h.params, c.N);
  } catch (const Error& e) {
    in.error(problem["h"], "problem.h", e.what());
  }
  try {
    make_k_preset(c.k.preset, c.k.params, c.N);
  } catch (const Error& e) {
    in.error(problem["k"], "problem.k", e.what());
  }

  if (const YAML::Node g = root["grid"]) {
    in.keys(g, "grid", {"r_min", "r_max", "M", "angular_order"});
    if (g["r_min"]) c.r_min = in.real(g["r_min"], "grid.r_min");
    if (g["r_max"]) c.r_max = in.real(g["r_max"], "grid.r_max");
    if (g["M"]) c.M = static_cast<int>(in.integer(g["M"], "grid.M"));
    if (g["angular_order"]) c.angular_order = static_cast<int>(in.integer(g["angular_order"], "grid.angular_order"));
    if (!(c.r_min > 0.0 && c.r_min < c.r_max)) in.error(g, "grid", "need 0 < r_min < r_max");
    if (c.M < 16) in.error(g["M"], "grid.M", "must be at least 16");
    if (c.angular_order < 8) in.error(g["angular_order"], "grid.angular_order", "must be at least 8");
  }

  if (const YAML::Node s = root["solver"]) {
    in.keys(s, "solver",
            {"max_iterations", "tolerance", "initial_step", "backstep", "armijo", "positivity", "trust_delta",
             "localized_log_step", "localized_angular_order"});
    SolverOptions& o = c.solver;
    if (s["max_iterations"]) o.max_iterations = static_cast<int>(in.integer(s["max_iterations"], "solver.max_iterations"));
    if (s["tolerance"]) o.tolerance = in.real(s["tolerance"], "solver.tolerance");
    if (s["initial_step"]) o.initial_step = in.real(s["initial_step"], "solver.initial_step");
    if (s["backstep"]) o.backstep = in.real(s["backstep"], "solver.backstep");
    if (s["armijo"]) o.armijo = in.real(s["armijo"], "solver.armijo");
    if (s["positivity"]) o.positivity = in.boolean(s["positivity"], "solver.positivity");
    if (s["trust_delta"]) o.trust_delta = in.real(s["trust_delta"], "solver.trust_delta");
    if (s["localized_log_step"]) o.localized_log_step = in.real(s["localized_log_step"], "solver.localized_log_step");
    if (s["localized_angular_order"])
      o.localized_angular_order = static_cast<int>(in.integer(s["localized_angular_order"], "solver.localized_angular_order"));
    try {
      o.validate();
    } catch (const Error& e) {
      in.error(s, "solver", e.what());
    }
  }

  if (const YAML::Node s = root["init"]) {
    in.keys(s, "init", {"profile", "A_over_Lambda", "mu", "amplitude", "perturbation"});
    InitConfig& i = c.init;
    if (s["profile"]) i.profile = in.text(s["profile"], "init.profile");
    if (i.profile != "ground_state" && i.profile != "talenti")
      in.error(s["profile"], "init.profile", "expected ground_state or talenti");
    if (s["A_over_Lambda"]) i.A_over_Lambda = in.real(s["A_over_Lambda"], "init.A_over_Lambda");
    if (s["mu"]) i.mu = in.real(s["mu"], "init.mu");
    if (s["amplitude"]) i.amplitude = in.real(s["amplitude"], "init.amplitude");
    if (s["perturbation"]) i.perturbation = in.real(s["perturbation"], "init.perturbation");
    if (!(i.mu > 0.0)) in.error(s["mu"], "init.mu", "must be positive");
  }

  if (const YAML::Node s = root["random"]) {
    in.keys(s, "random", {"count", "seed", "max_terms"});
    if (s["count"]) c.random.count = static_cast<int>(in.integer(s["count"], "random.count"));
    if (s["seed"]) c.random.seed = static_cast<unsigned long long>(in.integer(s["seed"], "random.seed"));
    if (s["max_terms"]) c.random.max_terms = static_cast<int>(in.integer(s["max_terms"], "random.max_terms"));
    if (c.random.count < 0) in.error(s["count"], "random.count", "must be nonnegative");
    if (c.random.max_terms < 1) in.error(s["max_terms"], "random.max_terms", "must be at least 1");
  }

  if (const YAML::Node s = root["sweep"]) {
    in.keys(s, "sweep", {"mu", "A_over_Lambda", "lambda_over_Lambda", "radii"});
    for (const auto& kv : s) {
      const std::string key = kv.first.as<std::string>();
      c.sweep[key] = in.list(kv.second, "sweep." + key);
      if (key == "mu" || key == "radii")
        for (double v : c.sweep[key])
          if (!(v > 0.0)) in.error(kv.second, "sweep." + key, "entries must be positive");
    }
  }

  if (const YAML::Node s = root["output"]) {
    in.keys(s, "output", {"dir"});
    if (s["dir"]) c.output_dir = in.text(s["dir"], "output.dir");
  }
  return c;
}

}  // namespace

ProblemSpec ExperimentConfig::spec() const { return spec_at(coupling); }

ProblemSpec ExperimentConfig::spec_at(double value) const {
  ProblemSpec s = ProblemSpec::make(N, value, make_h_preset(h.preset, h.params, N), make_k_preset(k.preset, k.params, N));
  s.quadrature = QuadratureSettings{build_grid(N, r_min, r_max, M), angular_order};
  return s;
}

const std::vector<double>* ExperimentConfig::sweep_list(const std::string& key) const {
  const auto it = sweep.find(key);
  return it == sweep.end() ? nullptr : &it->second;
}

nlohmann::ordered_json ExperimentConfig::resolved() const {
  json j;
  j["experiment"] = experiment;
  j["problem"] = {{"N", N},
                  {"coupling_name", coupling_name},
                  {"coupling", coupling},
                  {"coupling_over_Lambda", coupling / hardy_constant(N)},
                  {"h", {{"preset", h.preset}, {"params", h.params}}},
                  {"k", {{"preset", k.preset}, {"params", k.params}}}};
  j["grid"] = {{"r_min", r_min}, {"r_max", r_max}, {"M", M}, {"angular_order", angular_order}};
  j["solver"] = solver.to_json();
  j["solver"].erase("workers");  // execution setting, not part of the experiment
  j["init"] = {{"profile", init.profile},
               {"A_over_Lambda", init.A_over_Lambda ? json(*init.A_over_Lambda) : json(nullptr)},
               {"mu", init.mu},
               {"amplitude", init.amplitude},
               {"perturbation", init.perturbation}};
  j["random"] = {{"count", random.count}, {"seed", random.seed}, {"max_terms", random.max_terms}};
  json s = json::object();
  for (const auto& [key, values] : sweep) s[key] = values;
  j["sweep"] = s;
  return j;
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    std::ostringstream os;
    os << origin << ":" << e.mark.line + 1 << ":" << e.mark.column + 1 << ": " << e.msg;
    throw Error(ErrorCode::config_parse_error, os.str());
  }
  if (!root.IsMap()) throw Error(ErrorCode::config_parse_error, origin + ": the config must be a mapping");
  return read(root, origin);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config_parse_error, path + ": cannot open the config file");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str(), path);
}

}  // namespace critvar::runner
