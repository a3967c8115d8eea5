#pragma once

#include <string>

#include "critvar/coefficients.hpp"
#include "critvar/energy.hpp"
#include "json.hpp"

namespace critvar {

/// Lambda_N = (N-2)^2/4. Errors: dimension-too-small.
double lambda_N(int N);

/// Best Sobolev constant S, defined as the Dirichlet integral of the
/// normalized Talenti bubble (whose L^{2*} norm is one). Cached per N.
double best_sobolev(int N);

/// A threshold value and the branch of the minimum that attained it.
/// Branches whose coefficient value is not positive count as +infinity.
struct Threshold {
  double value = 0.0;
  std::string branch;
  nlohmann::ordered_json to_json() const;
};

/// c* = (1/N) S^{N/2} min over {0, inf} of (1 - (A + h(.))/Lambda_N)^{(N-1)/2}.
/// Errors: coupling-out-of-range (A + h(0) or A + h(inf) >= Lambda_N).
Threshold cstar(int N, double A, const CoefficientProfile& h);

/// min{||k||^{-(N-2)/2}, k(0)^{-(N-2)/2} s, k(inf)^{-(N-2)/2} s} (1/N) S^{N/2},
/// s = (1 - lambda/Lambda_N)^{(N-1)/2}. Errors: coupling-out-of-range.
Threshold tilde_c(int N, double lambda, const CoefficientProfile& k);
/// The radial variant without the ||k|| branch. Errors: coupling-out-of-range, not-radial.
Threshold tilde_c1(int N, double lambda, const CoefficientProfile& k);
/// tilde_c computed with k_+ = max(k, 0). Errors: coupling-out-of-range.
Threshold hat_c(int N, double lambda, const CoefficientProfile& k);

/// b(lambda); +infinity when k(0) = k(inf) = 0.
double b_lambda(int N, double lambda, const CoefficientProfile& k);

/// Lambda_N (1 - 2^{-2/(N-1)}): the coupling where 2(1 - lambda/Lambda_N)^{(N-1)/2} = 1.
double eps0_cap(int N);

/// 2(1 - lambda/Lambda_N)^{(N-1)/2} > 1.
bool positivity_gate(int N, double lambda);

/// Largest lambda with ||k||^{-(N-2)/2} <= b(lambda), found by bisection and
/// kept strictly below eps0_cap so that the positivity gate holds on (0, eps0].
/// Errors: hypothesis-violated ((K0) false).
double eps0(int N, const CoefficientProfile& k);

struct ThresholdReport {
  int N = 3;
  double Lambda = 0.0;
  double S = 0.0;
  std::optional<Threshold> cstar;
  std::optional<Threshold> tilde_c;
  std::optional<Threshold> tilde_c1;
  std::optional<Threshold> hat_c;
  std::optional<double> b;
  std::optional<double> eps0;
  nlohmann::ordered_json to_json() const;
};

/// Every threshold that is defined for the spec (coupling read as A for c*
/// and as lambda for the k thresholds).
ThresholdReport threshold_report(const ProblemSpec& spec);

}  // namespace critvar
