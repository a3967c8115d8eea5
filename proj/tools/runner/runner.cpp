#include "runner/runner.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "critvar/error.hpp"
#include "critvar/version.hpp"

namespace critvar::runner {

namespace {

using json = nlohmann::ordered_json;

const char* const kModules[] = {"quadrature", "fields",       "coefficients", "energy",    "thresholds",
                                "obstructions", "solver", "localization", "cli-runner"};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::config_parse_error:
    case ErrorCode::invalid_params:
    case ErrorCode::theta_out_of_range:
    case ErrorCode::coupling_out_of_range:
    case ErrorCode::dimension_too_small:
    case ErrorCode::invalid_range:
    case ErrorCode::infeasible_init:
      return kConfigError;
    case ErrorCode::hypothesis_violated:
      return kHypothesisViolated;
    case ErrorCode::trust_region_violation:
      return kNonConvergence;
    default:
      return kFailure;
  }
}

std::filesystem::path resolve_out_dir(const RunOptions& opts, const ExperimentConfig* config) {
  if (opts.out_dir) return *opts.out_dir;
  if (const char* env = std::getenv("CRITVAR_OUT_DIR"); env && *env) return env;
  if (config && !config->output_dir.empty()) return config->output_dir;
  return std::filesystem::path("out") / opts.subcommand;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::invalid_params, "cannot write " + path.string());
  out << text;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"verify-groundstate", "hardy",        "thresholds",    "pohozaev-audit",
                                                 "solve",              "multiplicity", "concentration", "hypotheses"};
  return names;
}

std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string summary_without_metadata(const std::filesystem::path& summary_path) {
  std::ifstream in(summary_path);
  if (!in) throw Error(ErrorCode::invalid_params, "cannot read " + summary_path.string());
  json j = json::parse(in);
  j.erase("metadata");
  return j.dump(2);
}

RunOutcome run(const RunOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  std::ostream* log = opts.log;
  auto fail = [&](int code, const std::string& message, const std::filesystem::path& dir) {
    if (log) *log << "error: " << message << "\n";
    return RunOutcome{code, dir, message};
  };

  const auto& subs = subcommands();
  if (std::find(subs.begin(), subs.end(), opts.subcommand) == subs.end())
    return fail(kConfigError, "unknown subcommand '" + opts.subcommand + "'", {});

  ExperimentConfig config;
  try {
    config = load_config(opts.config_path);
  } catch (const Error& e) {
    return fail(kConfigError, e.what(), resolve_out_dir(opts, nullptr));
  } catch (const std::exception& e) {
    return fail(kConfigError, opts.config_path + ": " + e.what(), resolve_out_dir(opts, nullptr));
  }
  const std::filesystem::path dir = resolve_out_dir(opts, &config);
  if (config.experiment != opts.subcommand)
    return fail(kConfigError,
                opts.config_path + ": experiment: '" + config.experiment + "' does not match subcommand '" +
                    opts.subcommand + "'",
                dir);

  Report rep;
  try {
    rep = run_experiment(opts.subcommand, config, opts.workers);
  } catch (const Error& e) {
    rep = Report{};
    rep.exit_code = exit_code_for(e.code());
    rep.message = std::string(to_string(e.code())) + ": " + e.what();
    rep.results = {{"error", {{"code", to_string(e.code())}, {"message", e.what()}}}};
  } catch (const std::exception& e) {
    rep = Report{};
    rep.exit_code = kFailure;
    rep.message = e.what();
    rep.results = {{"error", {{"code", "internal"}, {"message", e.what()}}}};
  }

  try {
    std::filesystem::create_directories(dir);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json summary;
    summary["metadata"] = {{"timestamp", utc_timestamp()}, {"elapsed_seconds", elapsed}, {"workers", opts.workers}};
    summary["version"] = kVersion;
    json modules = json::object();
    for (const char* m : kModules) modules[m] = kVersion;
    summary["modules"] = modules;
    summary["subcommand"] = opts.subcommand;
    summary["config"] = config.resolved();
    summary["status"] = {{"exit_code", rep.exit_code}, {"message", rep.message}};
    summary["results"] = rep.results;
    write_text(dir / "summary.json", summary.dump(2) + "\n");
    write_text(dir / "trace.csv", rep.trace_csv);
    if (!rep.fields.empty()) {
      std::filesystem::create_directories(dir / "fields");
      for (const auto& [stem, field] : rep.fields) write_text(dir / "fields" / (stem + ".json"), field.dump(2) + "\n");
    }
  } catch (const std::exception& e) {
    return fail(kFailure, e.what(), dir);
  }
  if (log) *log << opts.subcommand << ": " << rep.message << " (exit " << rep.exit_code << ", " << dir.string() << ")\n";
  return RunOutcome{rep.exit_code, dir, rep.message};
}

}  // namespace critvar::runner
