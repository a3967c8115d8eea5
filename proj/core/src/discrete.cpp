#include "critvar/discrete.hpp"

#include <sstream>

namespace critvar {

RadialDiscretization::RadialDiscretization(const ProblemSpec& spec, const RadialGrid& grid)
    : N_(spec.N),
      q_(half_codim(spec.N)),
      p_(critical_exponent(spec.N)),
      h_(grid.log_step()),
      omega_(sphere_measure(spec.N)),
      grid_(grid) {
  if (!spec.radial()) throw Error(ErrorCode::not_radial, "the radial discretization needs radial h and k");
  if (grid.dimension() != spec.N) throw Error(ErrorCode::invalid_params, "grid dimension does not match the spec");
  if (grid.size() < 8) throw Error(ErrorCode::invalid_params, "radial discretization needs at least 8 nodes");
  const int M = grid.size();
  hardy_w_.resize(M);
  k_w_.resize(M);
  for (int i = 0; i < M; ++i) {
    const double w = omega_ * grid.log_weight(i);
    const double rho = grid.node(i);
    hardy_w_(i) = w * (spec.coupling + spec.h.radial_value(rho));
    k_w_(i) = w * spec.k.radial_value(rho);
  }
}

Eigen::VectorXd RadialDiscretization::edges(const Eigen::VectorXd& v) const {
  const int M = size();
  const double h = h_;
  const double q = q_;
  const double em = std::exp(-0.5 * q * h);
  const double ep = std::exp(0.5 * q * h);
  auto at = [&](int j) { return j >= 0 && j < M ? v(j) : 0.0; };
  Eigen::VectorXd e(M);
  for (int i = 0; i < M; ++i) {
    const double b = at(i);
    const double c = at(i + 1);
    if (i == 0 || i >= M - 2) {
      e(i) = (em * c - ep * b) / h;
      continue;
    }
    const double a = at(i - 1);
    const double d = at(i + 2);
    const double D4 = (a - 27.0 * b + 27.0 * c - d) / (24.0 * h);
    const double M4 = (-a + 9.0 * b + 9.0 * c - d) / 16.0;
    e(i) = D4 - q * M4;
  }
  return e;
}

Eigen::VectorXd RadialDiscretization::edges_adjoint(const Eigen::VectorXd& f) const {
  const int M = size();
  const double h = h_;
  const double q = q_;
  const double ca = 1.0 / (24.0 * h) + q / 16.0;
  const double cb = -27.0 / (24.0 * h) - 9.0 * q / 16.0;
  const double cc = 27.0 / (24.0 * h) - 9.0 * q / 16.0;
  const double cd = -1.0 / (24.0 * h) + q / 16.0;
  const double em = std::exp(-0.5 * q * h);
  const double ep = std::exp(0.5 * q * h);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(M);
  auto add = [&](int j, double x) {
    if (j >= 0 && j < M) g(j) += x;
  };
  for (int i = 0; i < M; ++i) {
    if (i == 0 || i >= M - 2) {
      add(i, -ep / h * f(i));
      add(i + 1, em / h * f(i));
      continue;
    }
    add(i - 1, ca * f(i));
    add(i, cb * f(i));
    add(i + 1, cc * f(i));
    add(i + 2, cd * f(i));
  }
  return g;
}

RadialDiscretization::Parts RadialDiscretization::parts(const Eigen::VectorXd& v) const {
  const Eigen::VectorXd e = edges(v);
  Parts out;
  out.dirichlet = omega_ * h_ * e.squaredNorm();
  out.hardy = (hardy_w_.array() * v.array().square()).sum();
  out.nonlinear = (k_w_.array() * v.array().abs().pow(p_)).sum();
  return out;
}

EnergyBreakdown RadialDiscretization::energy(const Eigen::VectorXd& v) const {
  const Parts pt = parts(v);
  return EnergyBreakdown::from_parts(N_, pt.dirichlet, pt.hardy, pt.nonlinear);
}

double RadialDiscretization::J(const Eigen::VectorXd& v) const {
  const Parts pt = parts(v);
  return 0.5 * pt.dirichlet - 0.5 * pt.hardy - pt.nonlinear / p_;
}

Eigen::VectorXd RadialDiscretization::gradient(const Eigen::VectorXd& v) const {
  return quadratic_gradient(v) - critical_gradient(v);
}

Eigen::VectorXd RadialDiscretization::quadratic_gradient(const Eigen::VectorXd& v) const {
  Eigen::VectorXd g = omega_ * h_ * edges_adjoint(edges(v));
  g.array() -= hardy_w_.array() * v.array();
  return g;
}

Eigen::VectorXd RadialDiscretization::critical_gradient(const Eigen::VectorXd& v) const {
  return (k_w_.array() * v.array().abs().pow(p_ - 2.0) * v.array()).matrix();
}

Eigen::VectorXd RadialDiscretization::riesz(const Eigen::VectorXd& f) const {
  const int M = size();
  const double E = std::exp(q_ * h_);
  const double off = -omega_ / h_;
  Eigen::VectorXd diag = Eigen::VectorXd::Constant(M, omega_ * (E + 1.0 / E) / h_);
  diag(0) = omega_ * E / h_;
  // Thomas algorithm for the symmetric tridiagonal system
  Eigen::VectorXd c(M);
  Eigen::VectorXd d(M);
  double pivot = diag(0);
  if (!(pivot > 0.0)) throw Error(ErrorCode::linear_solve_failure, "nonpositive pivot in the Riesz solve");
  c(0) = off / pivot;
  d(0) = f(0) / pivot;
  for (int i = 1; i < M; ++i) {
    pivot = diag(i) - off * c(i - 1);
    if (!(pivot > 0.0) || !std::isfinite(pivot))
      throw Error(ErrorCode::linear_solve_failure, "nonpositive pivot in the Riesz solve");
    c(i) = off / pivot;
    d(i) = (f(i) - off * d(i - 1)) / pivot;
  }
  Eigen::VectorXd g(M);
  g(M - 1) = d(M - 1);
  for (int i = M - 2; i >= 0; --i) g(i) = d(i) - c(i) * g(i + 1);
  if (!g.allFinite()) throw Error(ErrorCode::linear_solve_failure, "non-finite Riesz representative");
  return g;
}

double RadialDiscretization::metric_norm2(const Eigen::VectorXd& g) const {
  const int M = size();
  const double E = std::exp(q_ * h_);
  double sum = E * g(0) * g(0);
  for (int i = 1; i < M; ++i) sum += (E + 1.0 / E) * g(i) * g(i);
  for (int i = 0; i + 1 < M; ++i) sum -= 2.0 * g(i) * g(i + 1);
  return omega_ * sum / h_;
}

double RadialDiscretization::nehari_factor(const Eigen::VectorXd& v) const {
  const Parts pt = parts(v);
  const double num = pt.dirichlet - pt.hardy;
  if (!(num > 0.0)) {
    std::ostringstream os;
    os << "Q(u) = " << num << " is not positive";
    throw Error(ErrorCode::nonpositive_numerator, os.str());
  }
  if (!(pt.nonlinear > 0.0)) {
    std::ostringstream os;
    os << "int k|u|^{2*} = " << pt.nonlinear << " is not positive";
    throw Error(ErrorCode::nonpositive_denominator, os.str());
  }
  return std::pow(num / pt.nonlinear, 1.0 / (p_ - 2.0));
}

Eigen::VectorXd RadialDiscretization::sample(const Field& u) const {
  if (!u.radial_about_origin()) throw Error(ErrorCode::not_radial, "field has terms away from the origin");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(size());
  for (const FieldTerm& term : u.terms())
    for (int i = 0; i < size(); ++i) v(i) += term.amplitude * term.profile.scaled_value(grid_.log_node(i));
  return v;
}

Field RadialDiscretization::to_field(const Eigen::VectorXd& v) const {
  return Field::radial(RadialProfile::grid_sampled(grid_, std::vector<double>(v.data(), v.data() + v.size())));
}

RadialGrid solver_grid(const ProblemSpec& spec, double log_center) {
  const int N = spec.N;
  const double Lambda = hardy_constant(N);
  auto decay = [&](double c, const char* where) {
    if (!(c < Lambda)) {
      std::ostringstream os;
      os << "A + h(" << where << ") = " << c << " is not below " << Lambda;
      throw Error(ErrorCode::coupling_out_of_range, os.str());
    }
    return std::sqrt(1.0 - c / Lambda);
  };
  const double nu0 = decay(spec.coupling + spec.h.value_at_zero(), "0");
  const double nuinf = decay(spec.coupling + spec.h.limit_at_infinity(), "inf");
  const double left = 41.0 / ((N - 2.0) * nu0);
  const double right = 41.0 / ((N - 2.0) * nuinf);
  const double lo = log_center - left;
  const double hi = log_center + right;
  return spec.quadrature.lattice.covering(lo, hi).clipped(lo, hi);
}

bool sampled_radial(const Field& u, RadialGrid* grid, Eigen::VectorXd* v) {
  if (u.terms().size() != 1) return false;
  const FieldTerm& term = u.terms().front();
  if (term.profile.family() != ProfileFamily::GridSampled || term.center.norm() != 0.0) return false;
  const RadialGrid g = term.profile.grid().shifted(term.profile.log_scale());
  if (grid) *grid = g;
  if (v) {
    const auto& s = term.profile.samples();
    *v = term.amplitude * Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
  }
  return true;
}

}  // namespace critvar
