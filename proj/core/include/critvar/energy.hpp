#pragma once

#include "critvar/coefficients.hpp"
#include "critvar/fields.hpp"
#include "critvar/quadrature.hpp"
#include "json.hpp"

namespace critvar {

/// The problem -Delta u = (A + h(x))/|x|^2 u + k(x) u^{2*-1} on R^N.
/// `coupling` is A in the Hardy-perturbation setting and lambda in the
/// multi-peak setting (where h is zero).
struct ProblemSpec {
  int N = 3;
  double coupling = 0.0;
  CoefficientProfile h;
  CoefficientProfile k;
  QuadratureSettings quadrature;

  /// Spec with the default quadrature of dimension N.
  static ProblemSpec make(int N, double coupling, CoefficientProfile h, CoefficientProfile k);
  /// h = 0, k = 1.
  static ProblemSpec unperturbed(int N, double coupling);

  bool radial() const { return h.radial() && k.radial(); }
  nlohmann::ordered_json to_json() const;
};

/// Hypotheses (h0)-(h2) on (A, h) followed by (K0)-(K3) on k.
HypothesisReport check_hypotheses(const ProblemSpec& spec);

struct EnergyBreakdown {
  double dirichlet = 0.0;
  /// int (A + h) u^2 / |x|^2
  double hardy = 0.0;
  /// int k |u|^{2*}
  double nonlinear = 0.0;
  double J = 0.0;
  /// <J'(u), u> = dirichlet - hardy - nonlinear
  double nehari_residual = 0.0;

  static EnergyBreakdown from_parts(int N, double dirichlet, double hardy, double nonlinear);
  /// Q(u) = dirichlet - hardy.
  double quadratic_form() const { return dirichlet - hardy; }
  nlohmann::ordered_json to_json() const;
};

/// int |grad u|^2.
double dirichlet_integral(const Field& u, const QuadratureSettings& set);
/// int u^2 / |x|^2.
double hardy_integral(const Field& u, const QuadratureSettings& set);
/// int |u|^{2*}.
double critical_integral(const Field& u, const QuadratureSettings& set);

/// All energy terms of u. Radial fields sampled on a lattice (the output of
/// the radial solver) are measured with the same discretization the solver
/// uses, so that their Nehari residual and gradient are consistent.
/// Errors: non-finite-integrand, unsupported-geometry.
EnergyBreakdown energy(const ProblemSpec& spec, const Field& u);

/// int |grad u|^2 / int u^2/|x|^2 (>= Lambda_N). Errors: zero-field.
double hardy_quotient(const Field& u, int N);
double hardy_quotient(const Field& u, const QuadratureSettings& set);

/// Q_A(u) / ||u||_{2*}^2 with Q_A(u) = int |grad u|^2 - A int u^2/|x|^2. Errors: zero-field.
double sobolev_quotient_QA(double A, const Field& u, int N);
double sobolev_quotient_QA(double A, const Field& u, const QuadratureSettings& set);

struct NehariScaling {
  double t = 1.0;
  /// Energy of t u.
  EnergyBreakdown energy;
};

/// t > 0 with t u on the Nehari manifold: t^{2*-2} = Q(u) / int k|u|^{2*}.
/// Errors: zero-field, nonpositive-numerator, nonpositive-denominator.
NehariScaling nehari_scale(const ProblemSpec& spec, const Field& u);

/// max_{t>0} J(t u) = (1/N) (Q(u) / (int k|u|^{2*})^{2/2*})^{N/2}.
/// Errors: nonpositive-form, nonpositive-denominator.
double mountain_pass_level(const ProblemSpec& spec, const Field& u);
/// Same formula from precomputed energy terms.
double mountain_pass_level(int N, const EnergyBreakdown& e);

/// Riesz representative of J'(u) in the discrete Dirichlet inner product for
/// a radial field sampled on a lattice. Errors: not-radial, linear-solve-failure.
Field gradient_J(const ProblemSpec& spec, const Field& u);

/// Weighted L^2 norm of the radial PDE residual
/// -phi'' - (N-1)/rho phi' - (A + h)/rho^2 phi - k phi^{2*-1}
/// relative to that of k phi^{2*-1}, evaluated on the nodes of `grid`
/// covering the profile's support. Errors: not-radial.
double profile_residual(const ProblemSpec& spec, const RadialProfile& phi, const RadialGrid& grid);

}  // namespace critvar
