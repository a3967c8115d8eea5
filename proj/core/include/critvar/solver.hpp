#pragma once

#include <optional>
#include <string>
#include <vector>

#include "critvar/energy.hpp"
#include "critvar/localization.hpp"
#include "critvar/thresholds.hpp"
#include "json.hpp"

namespace critvar {

struct SolverOptions {
  int max_iterations = 5000;
  /// Relative residual at which a solve counts as converged.
  double tolerance = 1e-5;
  double initial_step = 1.0;
  /// Step multiplier after a rejected Armijo trial.
  double backstep = 0.5;
  /// Sufficient-decrease constant of the Armijo test.
  double armijo = 1e-4;
  /// Replace the iterate by |u| before each Nehari projection.
  bool positivity = true;
  /// Trust-region bound on T_j for localized solves; defaults to the frame's delta.
  std::optional<double> trust_delta;
  /// Quadrature of localized solves (log step, angular order).
  double localized_log_step = 0.05;
  int localized_angular_order = 32;
  /// Concurrent localized solves in multiplicity runs.
  int workers = 1;
  bool record_trace = true;

  /// Errors: invalid-params.
  void validate() const;
  nlohmann::ordered_json to_json() const;
};

struct TraceRow {
  int iteration = 0;
  double J = 0.0;
  double residual = 0.0;
  /// Nehari factor applied at this iteration.
  double t = 1.0;
  /// Bubble scale and distance of its center to a_j (localized solves only).
  std::optional<double> mu;
  std::optional<double> offset;
  std::vector<double> T;
};

struct SolveResult {
  Field field;
  EnergyBreakdown energy;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  /// "converged", "max-iterations-exceeded", "line-search-stalled" or "trust-region-violation".
  std::string status;
  /// T_j of the result for every peak (localized solves).
  std::vector<double> localization;
  /// Threshold the energy is compared with, when one applies.
  std::optional<Threshold> threshold;
  bool below_threshold = false;
  /// Localized solves: peak index, bubble scale and center.
  int peak = -1;
  double scale = 0.0;
  Point center;
  std::vector<TraceRow> trace;

  double J() const { return energy.J; }
  nlohmann::ordered_json to_json() const;
  /// Columns: iteration,J,residual,t,mu,offset,T_1..T_m (m = number of peaks).
  std::string trace_csv() const;
};

/// Nehari-constrained descent of J on the solver lattice for radial problems.
/// Each iteration takes |u| (when enabled), a Riesz-preconditioned gradient
/// step with Armijo backtracking on J, and a Nehari rescaling.
/// Errors: not-radial, infeasible-init (zero field, Q(init) <= 0 or no
/// positive nonlinear term). Running out of iterations is not an error: the
/// result is returned with converged = false.
SolveResult solve_radial(const ProblemSpec& spec, const Field& init, const SolverOptions& opts = {});

/// Dirichlet norm of J'(u) relative to that of u. Radial fields are measured
/// on their own lattice when sampled and on the solver lattice otherwise; a
/// single Talenti bubble off the origin is measured through the reduced
/// gradient of the bubble ansatz. Zero for the zero field.
/// Errors: unsupported-geometry (other non-radial fields).
double residual(const ProblemSpec& spec, const Field& u);

/// Minimizes J over t mu^{-(N-2)/2} U((x - c)/mu) with U the Talenti bubble,
/// t fixed by the Nehari constraint, c within r0 of a_j and T_j < delta.
/// `j` is zero-based. Errors: hypothesis-violated ((K0)-(K2) fail or j out of
/// range), trust-region-violation (the minimizer reached T_j = delta or |c - a_j| = r0).
SolveResult solve_localized(const ProblemSpec& spec, int j, const SolverOptions& opts = {});

struct MultiplicityResult {
  PeakFrame frame;
  /// One result per maximum, ordered by energy; equal energies (to nine
  /// significant digits) put the smaller scale first.
  std::vector<SolveResult> results;
  SeparationReport separation;
  /// Every result converged below tilde c, away from the trust-region
  /// boundary, and the results localize at distinct peaks.
  bool gate = false;
  nlohmann::ordered_json to_json() const;
};

/// One localized solve per maximum of k, followed by a separation check.
/// Errors: hypothesis-violated.
MultiplicityResult multiplicity_run(const ProblemSpec& spec, const SolverOptions& opts = {});

}  // namespace critvar
