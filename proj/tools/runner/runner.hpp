#pragma once

#include <filesystem>
#include <functional>
#include <future>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "runner/config.hpp"

namespace critvar::runner {

enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,
  kConfigError = 2,
  kHypothesisViolated = 3,
  kNonConvergence = 4,
};

/// Names of the experiment subcommands.
const std::vector<std::string>& subcommands();

struct RunOptions {
  std::string subcommand;
  std::string config_path;
  /// Overrides CRITVAR_OUT_DIR, which overrides output.dir of the config.
  std::optional<std::string> out_dir;
  int workers = 1;
  std::ostream* log = nullptr;
};

struct RunOutcome {
  int exit_code = kSuccess;
  std::filesystem::path out_dir;
  std::string message;
};

/// Runs one experiment and writes summary.json, trace.csv and fields/*.json.
/// Never throws: failures map to exit codes with a message.
RunOutcome run(const RunOptions& opts);

/// Results of one experiment before they are written out.
struct Report {
  nlohmann::ordered_json results = nlohmann::ordered_json::object();
  std::string trace_csv;
  /// file stem -> field JSON
  std::vector<std::pair<std::string, nlohmann::ordered_json>> fields;
  int exit_code = kSuccess;
  std::string message = "ok";
};

/// Dispatches to the experiment named by `subcommand`.
Report run_experiment(const std::string& subcommand, const ExperimentConfig& config, int workers);

/// f(0..n-1) with at most `workers` calls in flight; results in index order.
template <class T>
std::vector<T> parallel_map(int n, int workers, const std::function<T(int)>& f) {
  std::vector<T> out(n);
  const int batch = std::max(1, workers);
  for (int start = 0; start < n; start += batch) {
    const int stop = std::min(n, start + batch);
    std::vector<std::future<T>> jobs;
    for (int i = start; i < stop; ++i) jobs.push_back(std::async(std::launch::async, f, i));
    for (int i = start; i < stop; ++i) out[i] = jobs[i - start].get();
  }
  return out;
}

/// Number with 17 significant digits, as used in every CSV.
std::string csv_number(double x);

/// Summary JSON without its metadata block, serialized; used for determinism checks.
std::string summary_without_metadata(const std::filesystem::path& summary_path);

}  // namespace critvar::runner
