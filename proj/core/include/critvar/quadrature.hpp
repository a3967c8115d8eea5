#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "critvar/constants.hpp"
#include "critvar/error.hpp"

namespace critvar {

using Point = Eigen::VectorXd;

/// Log-spaced nodes for integrals of the form int_0^inf f(rho) rho^{N-1} drho.
///
/// Nodes sit on the lattice s_k = s_0 + k h with s = log(rho). The weights are
/// trapezoid weights in s converted back to rho, w_i = h_i rho_i, where h_i is
/// h with the two end values halved. Grids derived through `covering` stay on
/// the same lattice, so integrals computed on different coverings of one base
/// grid share their nodes.
class RadialGrid {
 public:
  RadialGrid() = default;

  int dimension() const { return N_; }
  int size() const { return static_cast<int>(s_.size()); }
  double r_min() const { return rho_.front(); }
  double r_max() const { return rho_.back(); }
  double log_min() const { return s_.front(); }
  double log_max() const { return s_.back(); }
  double log_step() const { return h_; }

  double node(int i) const { return rho_[i]; }
  double log_node(int i) const { return s_[i]; }
  /// Weight for int f rho^{N-1} drho: log_weight(i) * rho_i.
  double weight(int i) const { return w_[i]; }
  /// Trapezoid weight in s.
  double log_weight(int i) const { return i == 0 || i + 1 == size() ? 0.5 * h_ : h_; }

  const std::vector<double>& nodes() const { return rho_; }
  const std::vector<double>& log_nodes() const { return s_; }
  const std::vector<double>& weights() const { return w_; }

  /// Same lattice, extended (never shrunk) so that [s_lo, s_hi] is covered.
  RadialGrid covering(double s_lo, double s_hi) const;
  /// Same lattice restricted to the nodes inside [s_lo, s_hi] (at least two nodes kept).
  RadialGrid clipped(double s_lo, double s_hi) const;
  /// Same extent with the log step halved (M -> 2M - 1).
  RadialGrid refined() const;
  /// Every node multiplied by e^{ds}.
  RadialGrid shifted(double ds) const;

  /// Grid on the lattice anchored at s_anchor with step h holding indices [k_lo, k_hi].
  static RadialGrid lattice(int N, double s_anchor, double h, long k_lo, long k_hi);

 private:
  int N_ = 0;
  double anchor_ = 0.0;
  double h_ = 0.0;
  long k_lo_ = 0;
  std::vector<double> s_;
  std::vector<double> rho_;
  std::vector<double> w_;
};

/// Geometric grid of M nodes between r_min and r_max.
/// Errors: invalid-range (r_min >= r_max or r_min <= 0), dimension-too-small, invalid-params (M < 16).
RadialGrid build_grid(int N, double r_min, double r_max, int M);

/// Default grid of the toolkit: [1e-8, 1e8] with 2000 nodes.
RadialGrid default_grid(int N);

/// Lattice and angular order used for integrals of fields. The lattice fixes
/// the log step and anchor; each integral widens it to the support it needs.
struct QuadratureSettings {
  RadialGrid lattice;
  int angular_order = 64;
};

QuadratureSettings default_quadrature(int N);
/// Same anchor as the default grid with a different log step.
QuadratureSettings quadrature_with_step(int N, double log_step, int angular_order);

namespace detail {
[[noreturn]] void throw_non_finite(double where);
}

/// omega_{N-1} * sum_i w_i f(rho_i) rho_i^{N-1}, i.e. int_{R^N} f(|x|) dx.
/// Errors: non-finite-integrand.
template <class F>
double integrate_radial(const RadialGrid& grid, F&& f) {
  const int N = grid.dimension();
  double sum = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    const double rho = grid.node(i);
    const double value = f(rho);
    if (!std::isfinite(value)) detail::throw_non_finite(rho);
    sum += grid.weight(i) * value * std::pow(rho, N - 1);
  }
  return sphere_measure(N) * sum;
}

/// omega_{N-1} * sum_i h_i g(s_i) where g already contains the measure rho^N,
/// i.e. g(s) = f(e^s) e^{N s}. Used for integrands whose factors overflow separately.
template <class G>
double integrate_log(const RadialGrid& grid, G&& g) {
  double sum = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    const double value = g(grid.log_node(i));
    if (!std::isfinite(value)) detail::throw_non_finite(grid.node(i));
    sum += grid.log_weight(i) * value;
  }
  return sphere_measure(grid.dimension()) * sum;
}

/// Nodes and weights of a Gauss rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Jacobi rule for the weight (1-t)^alpha (1+t)^beta, computed
/// once by Golub-Welsch and cached. Thread safe.
const GaussRule& gauss_jacobi(int n, double alpha, double beta);

/// Spherical cut for axial integrals: restricts the domain to the inside or
/// the outside of the ball of the given radius about the axial point z.
struct AxialCut {
  double z = 0.0;
  double radius = 1.0;
  bool inside = true;
};

/// Points of R^N lying on one line, expressed as coordinates along it.
struct AxialFrame {
  Point base;
  Point axis;
  std::vector<double> coords;
};

/// Line through the given points, or nullopt when they are not collinear.
/// When all points coincide the axis is `preferred_axis` if given, else e_1.
std::optional<AxialFrame> collinear_frame(const std::vector<Point>& points,
                                          const Point* preferred_axis = nullptr);

namespace detail {

struct AxialPart {
  double z = 0.0;
  std::vector<double> s;
  std::vector<double> ws;
  bool own_cut = false;
};

struct AxialPlan {
  int N = 0;
  double exponent = 0.0;
  double omega_axis = 0.0;
  std::vector<double> centers;   // distinct axial centers
  std::vector<int> user_to_center;
  std::vector<AxialPart> parts;
  const GaussRule* jacobi = nullptr;
  const GaussRule* legendre = nullptr;
  std::optional<AxialCut> cut;
};

AxialPlan plan_axial(const RadialGrid& grid, const std::vector<double>& z, int angular_order,
                     const std::optional<AxialCut>& cut);

/// Log nodes and weights on the side of s_cut kept by a cut, stepping from
/// s_cut with the grid's step out to the grid's far end. The weights are the
/// trapezoid rule with the fourth-order end correction (3/8, 7/6, 23/24) at
/// s_cut; the far end carries plain trapezoid weights, which is accurate for
/// integrands that have decayed there. Empty when the grid lies on the cut
/// side entirely.
void cut_side_rule(const RadialGrid& grid, double s_cut, bool inside, std::vector<double>& s,
                   std::vector<double>& ws);

}  // namespace detail

/// int_{R^N} K(x) dx for integrands that depend on x only through its
/// distances to points on a common axis and its axial coordinate.
///
/// The domain is split by a partition of unity: near center k the weight is
/// chi_k = r_k^{-p} / sum_m r_m^{-p} with p = 2N + 4, and each piece is
/// integrated in polar coordinates about its own center (log grid in rho,
/// Gauss-Jacobi in t = cos(theta) with weight (1-t^2)^{(N-3)/2}). Each piece
/// therefore sees at most the singularity of its own center. With a cut the
/// cut center joins the partition; its own piece splits the radial range at
/// the cut radius and the other pieces split the polar angle where the sphere
/// of radius rho crosses the cut sphere.
///
/// The kernel receives an array of distances to the points `z` (in the order
/// given) and the axial coordinate of x. Node magnitudes rho^N must stay
/// finite on the grid; callers clip grids to |s| <= 600/N.
template <class Kernel>
double integrate_axial(const RadialGrid& grid, const std::vector<double>& z, Kernel&& kernel,
                       int angular_order, const std::optional<AxialCut>& cut = std::nullopt) {
  const detail::AxialPlan plan = detail::plan_axial(grid, z, angular_order, cut);
  const int nc = static_cast<int>(plan.centers.size());
  const int nu = static_cast<int>(z.size());
  std::vector<double> dc(nc);
  std::vector<double> du(nu);
  const double p = plan.exponent;
  const double alpha = 0.5 * (plan.N - 3);

  // Evaluates the kernel with partition weight at one point of piece k.
  auto point_value = [&](int k, double rho, double t) {
    const double zk = plan.centers[k];
    const double one_minus_t2 = (1.0 - t) * (1.0 + t);
    double chi_den = 1.0;
    for (int m = 0; m < nc; ++m) {
      if (m == k) {
        dc[m] = rho;
        continue;
      }
      const double delta = zk - plan.centers[m];
      const double a = rho * t + delta;
      dc[m] = std::sqrt(a * a + rho * rho * one_minus_t2);
      if (dc[m] == 0.0) return 0.0;
      const double ratio = rho / dc[m];
      if (ratio > 1e20) return 0.0;
      chi_den += std::pow(ratio, p);
    }
    for (int u = 0; u < nu; ++u) du[u] = dc[plan.user_to_center[u]];
    const double value = kernel(du.data(), zk + rho * t);
    if (!std::isfinite(value)) detail::throw_non_finite(rho);
    return value / chi_den;
  };

  double total = 0.0;
  for (int k = 0; k < nc; ++k) {
    const detail::AxialPart& part = plan.parts[k];
    double part_sum = 0.0;
    for (std::size_t i = 0; i < part.s.size(); ++i) {
      const double rho = std::exp(part.s[i]);
      double angular = 0.0;
      bool split = false;
      double theta_star = 0.0;
      bool keep_upper = false;  // keep theta in [theta*, pi] when true
      if (plan.cut && !part.own_cut) {
        const double delta = part.z - plan.cut->z;
        const double R = plan.cut->radius;
        const double t_star = (R * R - rho * rho - delta * delta) / (2.0 * rho * delta);
        // inside <=> t < t* when delta > 0, t > t* when delta < 0
        bool all_inside = false;
        bool none_inside = false;
        if (t_star >= 1.0) {
          (delta > 0 ? all_inside : none_inside) = true;
        } else if (t_star <= -1.0) {
          (delta > 0 ? none_inside : all_inside) = true;
        } else {
          split = true;
          theta_star = std::acos(t_star);
          // t < t* is theta > theta*
          const bool inside_is_upper = delta > 0;
          keep_upper = plan.cut->inside ? inside_is_upper : !inside_is_upper;
        }
        if (!split) {
          const bool keep = plan.cut->inside ? all_inside : none_inside;
          if (!keep) continue;
        }
      }
      if (!split) {
        const GaussRule& rule = *plan.jacobi;
        for (std::size_t j = 0; j < rule.nodes.size(); ++j)
          angular += rule.weights[j] * point_value(k, rho, rule.nodes[j]);
      } else {
        const GaussRule& rule = *plan.legendre;
        const double a = keep_upper ? theta_star : 0.0;
        const double b = keep_upper ? M_PI : theta_star;
        const double half = 0.5 * (b - a);
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
          const double theta = a + half * (rule.nodes[j] + 1.0);
          const double sn = std::sin(theta);
          const double jac = alpha == 0.0 ? sn : std::pow(sn, plan.N - 2);
          angular += half * rule.weights[j] * jac * point_value(k, rho, std::cos(theta));
        }
      }
      part_sum += part.ws[i] * std::exp(plan.N * part.s[i]) * angular;
    }
    total += part_sum;
  }
  return plan.omega_axis * total;
}

/// int_{R^N} f(|x - c1|) g(|x - c2|) dx by the axial reduction.
/// Errors: invalid-params (angular_order < 8), non-finite-integrand.
double integrate_cross(const RadialGrid& grid, const std::function<double(double)>& f, const Point& c1,
                       const std::function<double(double)>& g, const Point& c2, int angular_order = 64);

}  // namespace critvar
