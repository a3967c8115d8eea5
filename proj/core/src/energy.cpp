#include "critvar/energy.hpp"

#include <sstream>

#include "critvar/discrete.hpp"
#include "integrals.hpp"

namespace critvar {

using detail::Quantity;

namespace {

constexpr double kTiny = 1e-300;

void require_nonzero(double denominator, const char* what) {
  if (!(std::abs(denominator) >= kTiny)) throw Error(ErrorCode::zero_field, std::string(what) + " vanishes");
}

}  // namespace

ProblemSpec ProblemSpec::make(int N, double coupling, CoefficientProfile h, CoefficientProfile k) {
  require_dimension(N);
  if (h.dimension() != N || k.dimension() != N)
    throw Error(ErrorCode::invalid_params, "coefficient dimension does not match N");
  ProblemSpec spec;
  spec.N = N;
  spec.coupling = coupling;
  spec.h = std::move(h);
  spec.k = std::move(k);
  spec.quadrature = default_quadrature(N);
  return spec;
}

ProblemSpec ProblemSpec::unperturbed(int N, double coupling) {
  return make(N, coupling, zero_coefficient(N), constant_coefficient(N, 1.0));
}

nlohmann::ordered_json ProblemSpec::to_json() const {
  nlohmann::ordered_json j;
  j["N"] = N;
  j["coupling"] = coupling;
  j["h"] = h.to_json();
  j["k"] = k.to_json();
  j["quadrature"] = {{"log_step", quadrature.lattice.log_step()},
                     {"r_min", quadrature.lattice.r_min()},
                     {"r_max", quadrature.lattice.r_max()},
                     {"M", quadrature.lattice.size()},
                     {"angular_order", quadrature.angular_order}};
  return j;
}

HypothesisReport check_hypotheses(const ProblemSpec& spec) {
  HypothesisReport out = check_h_hypotheses(spec.h, spec.coupling, spec.N);
  const HypothesisReport kr = check_k_hypotheses(spec.k, spec.N);
  out.entries.insert(out.entries.end(), kr.entries.begin(), kr.entries.end());
  return out;
}

EnergyBreakdown EnergyBreakdown::from_parts(int N, double dirichlet, double hardy, double nonlinear) {
  EnergyBreakdown e;
  e.dirichlet = dirichlet;
  e.hardy = hardy;
  e.nonlinear = nonlinear;
  e.J = 0.5 * dirichlet - 0.5 * hardy - nonlinear / critical_exponent(N);
  e.nehari_residual = dirichlet - hardy - nonlinear;
  return e;
}

nlohmann::ordered_json EnergyBreakdown::to_json() const {
  return {{"dirichlet", dirichlet},
          {"hardy", hardy},
          {"nonlinear", nonlinear},
          {"J", J},
          {"nehari_residual", nehari_residual}};
}

double dirichlet_integral(const Field& u, const QuadratureSettings& set) {
  return detail::integrate_field(u, Quantity::Dirichlet, nullptr, set);
}

double hardy_integral(const Field& u, const QuadratureSettings& set) {
  return detail::integrate_field(u, Quantity::Hardy, nullptr, set);
}

double critical_integral(const Field& u, const QuadratureSettings& set) {
  return detail::integrate_field(u, Quantity::Critical, nullptr, set);
}

EnergyBreakdown energy(const ProblemSpec& spec, const Field& u) {
  if (u.empty()) return {};
  RadialGrid grid;
  Eigen::VectorXd v;
  if (spec.radial() && sampled_radial(u, &grid, &v)) return RadialDiscretization(spec, grid).energy(v);
  const double D = dirichlet_integral(u, spec.quadrature);
  double H = spec.coupling == 0.0 ? 0.0 : spec.coupling * hardy_integral(u, spec.quadrature);
  H += detail::integrate_coefficient(u, Quantity::Hardy, spec.h, spec.quadrature);
  const double K = detail::integrate_coefficient(u, Quantity::Critical, spec.k, spec.quadrature);
  return EnergyBreakdown::from_parts(spec.N, D, H, K);
}

double hardy_quotient(const Field& u, int N) { return hardy_quotient(u, default_quadrature(N)); }

double hardy_quotient(const Field& u, const QuadratureSettings& set) {
  if (u.empty()) throw Error(ErrorCode::zero_field, "Hardy quotient of the zero field");
  const double H = hardy_integral(u, set);
  require_nonzero(H, "int u^2/|x|^2");
  return dirichlet_integral(u, set) / H;
}

double sobolev_quotient_QA(double A, const Field& u, int N) {
  return sobolev_quotient_QA(A, u, default_quadrature(N));
}

double sobolev_quotient_QA(double A, const Field& u, const QuadratureSettings& set) {
  if (u.empty()) throw Error(ErrorCode::zero_field, "Sobolev quotient of the zero field");
  const int N = u.dimension();
  const double C = critical_integral(u, set);
  require_nonzero(C, "int |u|^{2*}");
  const double Q = dirichlet_integral(u, set) - A * hardy_integral(u, set);
  return Q / std::pow(C, 2.0 / critical_exponent(N));
}

NehariScaling nehari_scale(const ProblemSpec& spec, const Field& u) {
  if (u.empty()) throw Error(ErrorCode::zero_field, "Nehari scaling of the zero field");
  const EnergyBreakdown e = energy(spec, u);
  const double Q = e.quadratic_form();
  if (!(Q > 0.0)) {
    std::ostringstream os;
    os << "Q(u) = " << Q << " is not positive; u cannot be scaled onto the Nehari manifold";
    throw Error(ErrorCode::nonpositive_numerator, os.str());
  }
  if (!(e.nonlinear > 0.0)) {
    std::ostringstream os;
    os << "int k|u|^{2*} = " << e.nonlinear << " is not positive";
    throw Error(ErrorCode::nonpositive_denominator, os.str());
  }
  const double p = critical_exponent(spec.N);
  NehariScaling out;
  out.t = std::pow(Q / e.nonlinear, 1.0 / (p - 2.0));
  const double t2 = out.t * out.t;
  const double tp = std::pow(out.t, p);
  out.energy = EnergyBreakdown::from_parts(spec.N, t2 * e.dirichlet, t2 * e.hardy, tp * e.nonlinear);
  return out;
}

double mountain_pass_level(int N, const EnergyBreakdown& e) {
  const double Q = e.quadratic_form();
  if (!(Q > 0.0)) {
    std::ostringstream os;
    os << "Q(u) = " << Q << " is not positive";
    throw Error(ErrorCode::nonpositive_form, os.str());
  }
  if (!(e.nonlinear > 0.0)) {
    std::ostringstream os;
    os << "int k|u|^{2*} = " << e.nonlinear << " is not positive";
    throw Error(ErrorCode::nonpositive_denominator, os.str());
  }
  const double p = critical_exponent(N);
  return std::pow(Q / std::pow(e.nonlinear, 2.0 / p), 0.5 * N) / N;
}

double mountain_pass_level(const ProblemSpec& spec, const Field& u) {
  return mountain_pass_level(spec.N, energy(spec, u));
}

Field gradient_J(const ProblemSpec& spec, const Field& u) {
  RadialGrid grid;
  Eigen::VectorXd v;
  if (!sampled_radial(u, &grid, &v))
    throw Error(ErrorCode::not_radial, "gradient_J needs a radial field sampled on a lattice");
  const RadialDiscretization disc(spec, grid);
  return disc.to_field(disc.riesz(disc.gradient(v)));
}

double profile_residual(const ProblemSpec& spec, const RadialProfile& phi, const RadialGrid& grid) {
  if (!spec.radial()) throw Error(ErrorCode::not_radial, "profile residual needs radial h and k");
  const int N = spec.N;
  const double p = critical_exponent(N);
  const auto [lo, hi] = phi.log_support();
  const RadialGrid g = grid.covering(lo, hi).clipped(lo, hi);
  // All terms multiplied by rho^{q+2}, which turns each into a function of s alone.
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    const double s = g.log_node(i);
    const double rho = g.node(i);
    const double v = phi.scaled_value(s);
    const double nonlinear = spec.k.radial_value(rho) * std::pow(std::abs(v), p - 2.0) * v;
    const double r = -phi.scaled_second_derivative(s) - (N - 1.0) * phi.scaled_derivative(s) -
                     (spec.coupling + spec.h.radial_value(rho)) * v - nonlinear;
    num += g.log_weight(i) * r * r;
    den += g.log_weight(i) * nonlinear * nonlinear;
  }
  require_nonzero(den, "int (k phi^{2*-1})^2");
  return std::sqrt(num / den);
}

}  // namespace critvar
