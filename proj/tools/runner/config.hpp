#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "critvar/energy.hpp"
#include "critvar/solver.hpp"
#include "json.hpp"

namespace critvar::runner {

/// Coefficient preset reference: tag plus free-form parameters.
struct PresetRef {
  std::string preset;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
};

/// Initial field of radial solves.
struct InitConfig {
  /// "ground_state" or "talenti".
  std::string profile = "ground_state";
  /// Coupling of the ground-state profile relative to Lambda_N; defaults to the problem's.
  std::optional<double> A_over_Lambda;
  double mu = 2.0;
  double amplitude = 1.0;
  /// Relative bump (1 + p exp(-(log(rho/mu) - 1)^2)) applied to the profile.
  double perturbation = 0.0;
};

/// Random bubble sums for the hardy experiment.
struct RandomFields {
  int count = 0;
  unsigned long long seed = 7;
  int max_terms = 3;
};

struct ExperimentConfig {
  std::string experiment;
  int N = 3;
  /// "A" (Hardy perturbation setting) or "lambda" (multi-peak setting).
  std::string coupling_name = "A";
  double coupling = 0.0;
  PresetRef h{"zero", nlohmann::ordered_json::object()};
  PresetRef k{"constant_one", nlohmann::ordered_json::object()};
  double r_min = 1e-8;
  double r_max = 1e8;
  int M = 2000;
  int angular_order = 64;
  SolverOptions solver;
  InitConfig init;
  RandomFields random;
  /// Nonempty numeric lists keyed by: mu, A_over_Lambda, lambda_over_Lambda, radii.
  std::map<std::string, std::vector<double>> sweep;
  std::string output_dir;

  /// Problem with the configured quadrature.
  ProblemSpec spec() const;
  /// Same problem at another coupling.
  ProblemSpec spec_at(double coupling) const;
  /// Every field, defaults filled in.
  nlohmann::ordered_json resolved() const;
  const std::vector<double>* sweep_list(const std::string& key) const;
};

/// Parses a YAML experiment file. Unknown keys, wrong types and invalid values
/// raise config-parse-error with the offending field path and line.
ExperimentConfig load_config(const std::string& path);
/// Same, from text (the `origin` names the source in diagnostics).
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<string>");

}  // namespace critvar::runner
