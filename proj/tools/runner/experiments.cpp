#include <random>
#include <sstream>

#include "critvar/discrete.hpp"
#include "critvar/obstructions.hpp"
#include "critvar/thresholds.hpp"
#include "runner/runner.hpp"

namespace critvar::runner {

namespace {

using json = nlohmann::ordered_json;

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::string row(std::initializer_list<std::string> cells) {
  std::string out;
  for (const auto& c : cells) out += (out.empty() ? "" : ",") + c;
  return out + "\n";
}

std::vector<double> couplings(const ExperimentConfig& c, const char* key) {
  if (const auto* list = c.sweep_list(key)) {
    std::vector<double> out;
    for (double f : *list) out.push_back(f * hardy_constant(c.N));
    return out;
  }
  return {c.coupling};
}

ProblemSpec unperturbed_spec(const ExperimentConfig& c, double A) {
  ProblemSpec s = ProblemSpec::unperturbed(c.N, A);
  s.quadrature = c.spec().quadrature;
  return s;
}

// verify-groundstate: quotient identity, residual and mountain-pass level of w_mu.
Report verify_groundstate(const ExperimentConfig& c, int workers) {
  const int N = c.N;
  const double Lambda = hardy_constant(N);
  const double S = best_sobolev(N);
  const std::vector<double> As = couplings(c, "A_over_Lambda");
  const std::vector<double> mus = c.sweep_list("mu") ? *c.sweep_list("mu") : std::vector<double>{1.0};
  struct Row {
    double A, mu, quotient, expected, qerr, residual, profile, hardy, level, expected_level, lerr;
  };
  const int n = static_cast<int>(As.size() * mus.size());
  const auto rows = parallel_map<Row>(n, workers, [&](int i) {
    const double A = As[i / mus.size()];
    const double mu = mus[i % mus.size()];
    const ProblemSpec spec = unperturbed_spec(c, A);
    const RadialProfile w = ground_state(N, A, mu);
    const Field u = Field::radial(w);
    Row r{};
    r.A = A;
    r.mu = mu;
    r.quotient = sobolev_quotient_QA(A, u, spec.quadrature);
    r.expected = S * std::pow(1.0 - A / Lambda, (N - 1.0) / N);
    r.qerr = std::abs(r.quotient - r.expected) / r.expected;
    r.residual = residual(spec, u);
    r.profile = profile_residual(spec, w, spec.quadrature.lattice);
    r.hardy = hardy_quotient(u, spec.quadrature);
    r.level = mountain_pass_level(spec, u);
    r.expected_level = std::pow(S, 0.5 * N) * std::pow(1.0 - A / Lambda, 0.5 * (N - 1.0)) / N;
    r.lerr = std::abs(r.level - r.expected_level) / r.expected_level;
    return r;
  });

  Report rep;
  rep.trace_csv = row({"A", "mu", "quotient", "expected_quotient", "quotient_rel_error", "residual", "profile_residual",
                       "hardy_quotient", "level", "expected_level", "level_rel_error"});
  json list = json::array();
  double max_q = 0.0, max_res = 0.0, max_l = 0.0;
  for (const Row& r : rows) {
    rep.trace_csv += row({csv_number(r.A), csv_number(r.mu), csv_number(r.quotient), csv_number(r.expected),
                          csv_number(r.qerr), csv_number(r.residual), csv_number(r.profile), csv_number(r.hardy),
                          csv_number(r.level), csv_number(r.expected_level), csv_number(r.lerr)});
    list.push_back({{"A", r.A},
                    {"A_over_Lambda", r.A / Lambda},
                    {"mu", r.mu},
                    {"quotient", r.quotient},
                    {"expected_quotient", r.expected},
                    {"quotient_rel_error", r.qerr},
                    {"residual", r.residual},
                    {"profile_residual", r.profile},
                    {"hardy_quotient", r.hardy},
                    {"level", r.level},
                    {"expected_level", r.expected_level},
                    {"level_rel_error", r.lerr}});
    max_q = std::max(max_q, r.qerr);
    max_res = std::max(max_res, r.residual);
    max_l = std::max(max_l, r.lerr);
  }
  rep.results = {{"Lambda", Lambda},
                 {"S", S},
                 {"max_quotient_rel_error", max_q},
                 {"max_residual", max_res},
                 {"max_level_rel_error", max_l},
                 {"rows", list}};
  return rep;
}

// Bubble sum with centers on one random line through the origin.
Field random_bubble_sum(int N, std::mt19937_64& rng, int max_terms) {
  std::uniform_int_distribution<int> terms(1, max_terms);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Point axis(N);
  for (int i = 0; i < N; ++i) axis(i) = gauss(rng);
  axis.normalize();
  const int n = terms(rng);
  Field u(N);
  for (int t = 0; t < n; ++t) {
    const double scale = std::pow(10.0, -1.0 + 2.0 * unit(rng));
    const double amp = (unit(rng) < 0.25 ? -1.0 : 1.0) * (0.2 + unit(rng));
    const double z = unit(rng) < 0.3 ? 0.0 : (unit(rng) - 0.5) * 6.0;
    if (unit(rng) < 0.5)
      u.add(amp, talenti(N, scale), z * axis);
    else
      u.add(amp, ground_state(N, hardy_constant(N) * (0.05 + 0.9 * unit(rng)), scale), z * axis);
  }
  return u;
}

// hardy: the Hardy quotient on ground states approaching Lambda_N and on random bubble sums.
Report hardy(const ExperimentConfig& c, int workers) {
  const int N = c.N;
  const double Lambda = hardy_constant(N);
  const ProblemSpec spec = c.spec();
  const std::vector<double> fractions =
      c.sweep_list("A_over_Lambda") ? *c.sweep_list("A_over_Lambda") : std::vector<double>{0.5, 0.9, 0.99};
  const std::vector<double> mus = c.sweep_list("mu") ? *c.sweep_list("mu") : std::vector<double>{1.0};

  std::vector<std::pair<std::string, Field>> fields;
  std::vector<json> labels;
  for (double f : fractions)
    for (double mu : mus) {
      fields.emplace_back("ground_state", Field::radial(ground_state(N, f * Lambda, mu)));
      labels.push_back({{"A_over_Lambda", f}, {"mu", mu}});
    }
  std::mt19937_64 rng(c.random.seed);
  for (int i = 0; i < c.random.count; ++i) {
    fields.emplace_back("bubble_sum", random_bubble_sum(N, rng, c.random.max_terms));
    labels.push_back({{"terms", fields.back().second.terms().size()}});
  }
  const auto q = parallel_map<double>(static_cast<int>(fields.size()), workers,
                                      [&](int i) { return hardy_quotient(fields[i].second, spec.quadrature); });

  Report rep;
  rep.trace_csv = row({"kind", "index", "A_over_Lambda", "mu", "terms", "quotient", "excess"});
  json gs = json::array();
  double min_q = std::numeric_limits<double>::infinity();
  double min_random = min_q;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const bool ground = fields[i].first == "ground_state";
    const double f = ground ? labels[i]["A_over_Lambda"].get<double>() : std::nan("");
    const double mu = ground ? labels[i]["mu"].get<double>() : std::nan("");
    rep.trace_csv += row({fields[i].first, std::to_string(i), ground ? csv_number(f) : "", ground ? csv_number(mu) : "",
                          std::to_string(fields[i].second.terms().size()), csv_number(q[i]), csv_number(q[i] - Lambda)});
    min_q = std::min(min_q, q[i]);
    if (ground) {
      gs.push_back({{"A_over_Lambda", f}, {"mu", mu}, {"quotient", q[i]}, {"relative_gap", (q[i] - Lambda) / Lambda}});
    } else {
      min_random = std::min(min_random, q[i]);
    }
  }
  rep.results = {{"Lambda", Lambda},
                 {"min_quotient", min_q},
                 {"min_excess", min_q - Lambda},
                 {"ground_states", gs},
                 {"random", {{"count", c.random.count}, {"min_quotient", finite_or_null(min_random)}}}};
  return rep;
}

// thresholds: every threshold of the spec plus a lambda sweep of the k thresholds.
Report thresholds(const ExperimentConfig& c, int) {
  const int N = c.N;
  const double Lambda = hardy_constant(N);
  const ProblemSpec spec = c.spec();
  Report rep;
  rep.results["report"] = threshold_report(spec).to_json();
  std::optional<double> e0;
  try {
    e0 = eps0(N, spec.k);
  } catch (const Error&) {
  }
  rep.results["eps0"] = e0 ? json(*e0) : json(nullptr);
  rep.results["eps0_cap"] = eps0_cap(N);

  rep.trace_csv = row({"lambda_over_Lambda", "lambda", "tilde_c", "tilde_c_branch", "hat_c", "b", "positivity_value",
                       "positivity_gate", "below_eps0"});
  json rows = json::array();
  std::optional<double> first;
  double spread = 0.0;
  const std::vector<double> fr =
      c.sweep_list("lambda_over_Lambda") ? *c.sweep_list("lambda_over_Lambda") : std::vector<double>{};
  for (double f : fr) {
    const double lambda = f * Lambda;
    const Threshold tc = tilde_c(N, lambda, spec.k);
    const Threshold hc = hat_c(N, lambda, spec.k);
    const double b = b_lambda(N, lambda, spec.k);
    const double pos = 2.0 * std::pow(1.0 - lambda / Lambda, 0.5 * (N - 1.0));
    const bool gate = positivity_gate(N, lambda);
    const bool below = e0 && lambda <= *e0;
    if (below) {
      if (!first) first = tc.value;
      spread = std::max(spread, std::abs(tc.value - *first) / *first);
    }
    rep.trace_csv += row({csv_number(f), csv_number(lambda), csv_number(tc.value), tc.branch, csv_number(hc.value),
                          csv_number(b), csv_number(pos), gate ? "1" : "0", below ? "1" : "0"});
    rows.push_back({{"lambda_over_Lambda", f},
                    {"lambda", lambda},
                    {"tilde_c", tc.to_json()},
                    {"hat_c", hc.to_json()},
                    {"b", finite_or_null(b)},
                    {"positivity_value", pos},
                    {"positivity_gate", gate},
                    {"below_eps0", below}});
  }
  rep.results["sweep"] = rows;
  rep.results["tilde_c_spread_below_eps0"] = spread;
  return rep;
}

// pohozaev-audit: the nonexistence audit; an obstruction exits with code 3.
Report pohozaev_audit(const ExperimentConfig& c, int) {
  const ProblemSpec spec = c.spec();
  const ObstructionVerdict v = nonexistence_audit(spec);
  Report rep;
  rep.results = v.to_json();
  rep.results.erase("witness_field");
  if (v.witness_field) rep.fields.emplace_back("witness", v.witness_field->to_json());
  rep.trace_csv = row({"quantity", "value"});
  rep.trace_csv += row({"verdict", to_string(v.verdict)});
  rep.trace_csv += row({"witness_value", csv_number(v.witness_value)});
  rep.trace_csv += row({"coupling", csv_number(spec.coupling)});
  rep.trace_csv += row({"Lambda_N", csv_number(hardy_constant(spec.N))});
  if (v.details.contains("I1_upper_bound"))
    rep.trace_csv += row({"I1_upper_bound", csv_number(v.details["I1_upper_bound"].get<double>())});
  if (v.verdict != Verdict::NoObstructionFound) {
    rep.exit_code = kHypothesisViolated;
    rep.message = std::string("obstruction: ") + to_string(v.verdict);
  }
  return rep;
}

// hypotheses: (h0)-(h2) and (K0)-(K3); any failure exits with code 3.
Report hypotheses(const ExperimentConfig& c, int) {
  const HypothesisReport h = check_hypotheses(c.spec());
  Report rep;
  rep.results = h.to_json();
  rep.trace_csv = row({"hypothesis", "holds"});
  std::string failed;
  for (const auto& e : h.entries) {
    rep.trace_csv += row({e.name, e.holds ? "1" : "0"});
    if (!e.holds) failed += (failed.empty() ? "" : ", ") + e.name;
  }
  if (!failed.empty()) {
    rep.exit_code = kHypothesisViolated;
    rep.message = "hypotheses failing: " + failed;
  }
  return rep;
}

Field initial_field(const ExperimentConfig& c, const ProblemSpec& spec) {
  const int N = c.N;
  const double Lambda = hardy_constant(N);
  const InitConfig& in = c.init;
  RadialProfile phi;
  if (in.profile == "talenti") {
    phi = talenti(N, in.mu);
  } else {
    const double A = in.A_over_Lambda ? *in.A_over_Lambda * Lambda : spec.coupling;
    phi = A > 0.0 ? ground_state(N, A, in.mu) : talenti(N, in.mu);
  }
  if (in.perturbation == 0.0) return Field::radial(phi, in.amplitude);
  const auto [lo, hi] = phi.log_support();
  const double limit = 600.0 / N;
  const RadialGrid grid = spec.quadrature.lattice.covering(lo, hi).clipped(std::max(lo, -limit), std::min(hi, limit));
  std::vector<double> v(grid.size());
  const double s0 = std::log(in.mu) + 1.0;
  for (int i = 0; i < grid.size(); ++i) {
    const double s = grid.log_node(i);
    v[i] = phi.scaled_value(s) * (1.0 + in.perturbation * std::exp(-(s - s0) * (s - s0)));
  }
  return Field::radial(RadialProfile::grid_sampled(grid, std::move(v)), in.amplitude);
}

// solve: Nehari-constrained descent for a radial problem.
Report solve(const ExperimentConfig& c, int) {
  const ProblemSpec spec = c.spec();
  const HypothesisReport hyp = check_h_hypotheses(spec.h, spec.coupling, spec.N);
  Report rep;
  rep.results["hypotheses"] = hyp.to_json();
  if (!hyp.all()) {
    rep.exit_code = kHypothesisViolated;
    rep.message = "hypotheses (h0)-(h2) do not hold";
    rep.trace_csv = row({"iteration", "J", "residual", "t", "mu", "offset"});
    return rep;
  }
  const SolveResult r = solve_radial(spec, initial_field(c, spec), c.solver);
  rep.results["result"] = r.to_json();
  rep.results["threshold_margin"] = r.threshold ? json(r.threshold->value - r.J()) : json(nullptr);
  rep.trace_csv = r.trace_csv();
  rep.fields.emplace_back("solution", r.field.to_json());
  if (!r.converged) {
    rep.exit_code = kNonConvergence;
    rep.message = "solver stopped: " + r.status;
  }
  return rep;
}

struct SweepRun {
  double lambda = 0.0;
  MultiplicityResult run;
};

std::vector<SweepRun> lambda_sweep(const ExperimentConfig& c, int workers, std::vector<double> fallback) {
  const double Lambda = hardy_constant(c.N);
  std::vector<double> lambdas;
  if (const auto* list = c.sweep_list("lambda_over_Lambda")) {
    for (double f : *list) lambdas.push_back(f * Lambda);
  } else if (!fallback.empty()) {
    for (double f : fallback) lambdas.push_back(f * Lambda);
  } else {
    lambdas.push_back(c.coupling);
  }
  const int n = static_cast<int>(lambdas.size());
  SolverOptions opts = c.solver;
  opts.workers = n > 1 ? 1 : std::max(1, workers);
  return parallel_map<SweepRun>(n, n > 1 ? workers : 1, [&](int i) {
    return SweepRun{lambdas[i], multiplicity_run(c.spec_at(lambdas[i]), opts)};
  });
}

void add_traces(Report& rep, const std::vector<SweepRun>& runs) {
  std::size_t m = 0;
  for (const auto& s : runs) m = std::max(m, s.run.frame.maxima.size());
  std::string header = "lambda,peak,iteration,J,residual,t,mu,offset";
  for (std::size_t i = 0; i < m; ++i) header += ",T_" + std::to_string(i + 1);
  rep.trace_csv = header + "\n";
  for (const auto& s : runs)
    for (const auto& r : s.run.results)
      for (const auto& t : r.trace) {
        std::string line = csv_number(s.lambda) + "," + std::to_string(r.peak + 1) + "," + std::to_string(t.iteration) +
                           "," + csv_number(t.J) + "," + csv_number(t.residual) + "," + csv_number(t.t) + "," +
                           (t.mu ? csv_number(*t.mu) : "") + "," + (t.offset ? csv_number(*t.offset) : "");
        for (std::size_t i = 0; i < m; ++i) line += "," + (i < t.T.size() ? csv_number(t.T[i]) : "");
        rep.trace_csv += line + "\n";
      }
}

json sweep_json(const ExperimentConfig& c, const SweepRun& s) {
  const double Lambda = hardy_constant(c.N);
  json j;
  j["lambda"] = s.lambda;
  j["lambda_over_Lambda"] = s.lambda / Lambda;
  j["positivity_gate"] = positivity_gate(c.N, s.lambda);
  j["run"] = s.run.to_json();
  return j;
}

// multiplicity: one localized solve per maximum of k at each lambda.
Report multiplicity(const ExperimentConfig& c, int workers) {
  const auto runs = lambda_sweep(c, workers, {});
  Report rep;
  std::optional<double> e0;
  try {
    e0 = eps0(c.N, c.spec().k);
  } catch (const Error&) {
  }
  rep.results["eps0"] = e0 ? json(*e0) : json(nullptr);
  json list = json::array();
  bool converged = true;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    list.push_back(sweep_json(c, runs[i]));
    for (const auto& r : runs[i].run.results) {
      converged = converged && r.converged;
      rep.fields.emplace_back("lambda" + std::to_string(i + 1) + "_peak" + std::to_string(r.peak + 1), r.field.to_json());
    }
  }
  rep.results["sweep"] = list;
  add_traces(rep, runs);
  if (!converged) {
    rep.exit_code = kNonConvergence;
    rep.message = "some localized solves did not converge";
  }
  return rep;
}

// concentration: lambda sweep of multiplicity runs with tail masses and mass fractions.
Report concentration(const ExperimentConfig& c, int workers) {
  const auto runs = lambda_sweep(c, workers, {0.2, 0.1, 0.05});
  const ProblemSpec spec = c.spec();
  const std::vector<double> radii =
      c.sweep_list("radii") ? *c.sweep_list("radii") : std::vector<double>{1, 2, 4, 8, 16, 32};
  Report rep;
  std::vector<LocalizedSolution> sols;
  bool converged = true;
  json list = json::array();
  for (const auto& s : runs) {
    list.push_back(sweep_json(c, s));
    for (const auto& r : s.run.results) {
      converged = converged && r.converged;
      sols.push_back({s.lambda, r.peak, r.field});
    }
  }
  const PeakFrame frame = make_peak_frame(spec.k);
  rep.results["verification"] = concentration_verify(sols, frame, spec).to_json();
  const auto tails = parallel_map<ConcentrationReport>(static_cast<int>(sols.size()), workers,
                                                       [&](int i) { return tail_masses(sols[i].field, spec, radii); });
  rep.trace_csv = row({"lambda", "peak", "R", "mu_R", "nu_R", "gamma_R"});
  json tj = json::array();
  for (std::size_t i = 0; i < sols.size(); ++i) {
    const auto& t = tails[i];
    for (std::size_t k = 0; k < t.radii.size(); ++k)
      rep.trace_csv += row({csv_number(sols[i].lambda), std::to_string(sols[i].peak + 1), csv_number(t.radii[k]),
                            csv_number(t.dirichlet_tail[k]), csv_number(t.critical_tail[k]), csv_number(t.hardy_tail[k])});
    json e = t.to_json();
    e["lambda"] = sols[i].lambda;
    e["peak"] = sols[i].peak;
    tj.push_back(e);
  }
  rep.results["sweep"] = list;
  rep.results["tails"] = tj;
  if (!converged) {
    rep.exit_code = kNonConvergence;
    rep.message = "some localized solves did not converge";
  }
  return rep;
}

}  // namespace

Report run_experiment(const std::string& subcommand, const ExperimentConfig& config, int workers) {
  if (subcommand == "verify-groundstate") return verify_groundstate(config, workers);
  if (subcommand == "hardy") return hardy(config, workers);
  if (subcommand == "thresholds") return thresholds(config, workers);
  if (subcommand == "pohozaev-audit") return pohozaev_audit(config, workers);
  if (subcommand == "hypotheses") return hypotheses(config, workers);
  if (subcommand == "solve") return solve(config, workers);
  if (subcommand == "multiplicity") return multiplicity(config, workers);
  if (subcommand == "concentration") return concentration(config, workers);
  throw Error(ErrorCode::config_parse_error, "unknown subcommand '" + subcommand + "'");
}

}  // namespace critvar::runner
