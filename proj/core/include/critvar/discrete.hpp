#pragma once

#include <Eigen/Dense>

#include "critvar/energy.hpp"

namespace critvar {

/// Finite-dimensional model of J for radial fields.
///
/// A radial field is stored through its Emden-Fowler samples v_i = rho_i^q u(rho_i)
/// on a lattice s_i = log(rho_i), with zero beyond the right end. In these
/// variables
///   int |grad u|^2     = omega int (v' - q v)^2 ds,
///   int c u^2/|x|^2    = omega int c v^2 ds,
///   int k |u|^{2*}     = omega int k |v|^{2*} ds,
/// where omega is the measure of the unit sphere. The derivative term is
/// evaluated on the edges between nodes with fourth order stencils (second
/// order exponential differences on the two outer edges at each end), the
/// other two terms with the trapezoid rule. Gradients are the exact
/// derivatives of this discrete functional.
///
/// The Riesz map uses the second order discrete Dirichlet form
///   G(v, v) = omega/h sum_i (e^{-qh/2} v_{i+1} - e^{qh/2} v_i)^2,
/// which is tridiagonal and solved by the Thomas algorithm.
class RadialDiscretization {
 public:
  struct Parts {
    double dirichlet = 0.0;
    double hardy = 0.0;
    double nonlinear = 0.0;
  };

  /// Errors: not-radial (h or k not radial), invalid-params (fewer than 8 nodes).
  RadialDiscretization(const ProblemSpec& spec, const RadialGrid& grid);

  const RadialGrid& grid() const { return grid_; }
  int size() const { return grid_.size(); }
  int dimension() const { return N_; }

  Parts parts(const Eigen::VectorXd& v) const;
  EnergyBreakdown energy(const Eigen::VectorXd& v) const;
  double J(const Eigen::VectorXd& v) const;
  /// Euclidean gradient of J with respect to the samples.
  Eigen::VectorXd gradient(const Eigen::VectorXd& v) const;
  /// Half the gradient of Q = dirichlet - hardy.
  Eigen::VectorXd quadratic_gradient(const Eigen::VectorXd& v) const;
  /// 1/2* times the gradient of the nonlinear term.
  Eigen::VectorXd critical_gradient(const Eigen::VectorXd& v) const;
  /// Solves G g = f. Errors: linear-solve-failure.
  Eigen::VectorXd riesz(const Eigen::VectorXd& f) const;
  /// G(g, g).
  double metric_norm2(const Eigen::VectorXd& g) const;
  /// Nehari factor t with t v on the discrete Nehari manifold.
  /// Errors: nonpositive-numerator, nonpositive-denominator.
  double nehari_factor(const Eigen::VectorXd& v) const;

  /// Samples of a field whose terms are all centered at the origin.
  /// Errors: not-radial.
  Eigen::VectorXd sample(const Field& u) const;
  /// GridSampled radial field holding v.
  Field to_field(const Eigen::VectorXd& v) const;

 private:
  Eigen::VectorXd edges(const Eigen::VectorXd& v) const;
  Eigen::VectorXd edges_adjoint(const Eigen::VectorXd& f) const;

  int N_;
  double q_;
  double p_;
  double h_;
  double omega_;
  RadialGrid grid_;
  Eigen::VectorXd hardy_w_;
  Eigen::VectorXd k_w_;
};

/// Lattice used by the radial solver around the log scale `log_center`:
/// the spec's log step, extending 41/((N-2) nu_0) to the left and
/// 41/((N-2) nu_inf) to the right, nu_0 and nu_inf the decay exponents of
/// ground states at couplings A + h(0) and A + h(inf).
/// Errors: coupling-out-of-range (A + h(0) or A + h(inf) >= Lambda_N).
RadialGrid solver_grid(const ProblemSpec& spec, double log_center);

/// If u is a single GridSampled term at the origin, the lattice it lives on
/// and its samples (amplitude included).
bool sampled_radial(const Field& u, RadialGrid* grid, Eigen::VectorXd* v);

}  // namespace critvar
