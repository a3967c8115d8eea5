#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "critvar/quadrature.hpp"
#include "json.hpp"

namespace critvar {

enum class ProfileFamily { GroundState, Talenti, GridSampled };

const char* to_string(ProfileFamily family) noexcept;

/// A radial function phi(rho) about an implicit center.
///
/// Closed-form families are stored through their Emden-Fowler form
/// v(s) = rho^q phi(rho), s = log(rho), q = (N-2)/2, which for both families is
///   v(s) = K (2 cosh(nu (s - log mu)))^{-q}.
/// Ground states have K = (N(N-2)nu^2)^{(N-2)/4} and nu = sqrt(1 - A/Lambda_N);
/// Talenti bubbles have nu = 1 and K = C_1, the constant making ||u||_{2*} = 1.
/// The scaled accessors never overflow, which matters for nu close to 0 where
/// the profile is spread over hundreds of decades.
///
/// GridSampled profiles store v on a lattice of log radii and interpolate it
/// with a monotone cubic (PCHIP) in s; outside the lattice v is extended
/// log-linearly, which is linear extrapolation of phi in log-log coordinates.
class RadialProfile {
 public:
  RadialProfile() = default;

  static RadialProfile ground_state(int N, double A, double mu);
  static RadialProfile talenti(int N, double r);
  /// Samples v_i = rho_i^q phi(rho_i) at the nodes of `grid`.
  static RadialProfile grid_sampled(const RadialGrid& grid, std::vector<double> scaled_values);

  ProfileFamily family() const { return family_; }
  int dimension() const { return N_; }
  /// Coupling A for ground states, 0 otherwise.
  double coupling() const { return A_; }
  /// Scale mu (ground state), r (Talenti), or 1 for sampled profiles relative to their grid.
  double scale() const { return std::exp(log_scale_); }
  double log_scale() const { return log_scale_; }
  /// Decay exponent nu of the closed-form families (nu = 1 for Talenti).
  double nu() const { return nu_; }
  /// Prefactor K of the Emden-Fowler form.
  double prefactor() const { return K_; }

  double value(double rho) const;
  double derivative(double rho) const;
  /// Analytic for closed forms; for sampled profiles from the interpolant.
  double second_derivative(double rho) const;

  /// rho^q phi(rho) at s = log(rho).
  double scaled_value(double s) const;
  /// rho^{q+1} phi'(rho) at s = log(rho).
  double scaled_derivative(double s) const;
  /// rho^{q+2} phi''(rho) at s = log(rho).
  double scaled_second_derivative(double s) const;

  /// True when phi blows up at rho = 0 (ground states with nu < 1).
  bool singular_at_center() const;

  /// Log-radius window outside which the energy densities v^2, (rho phi')^2
  /// rho^{N-2} have dropped below `tol` times their peak.
  std::pair<double, double> log_support(double tol = 1e-17) const;

  /// mu^{-q} phi(rho / mu).
  RadialProfile scaled(double mu) const;

  /// Lattice and samples of a GridSampled profile.
  const RadialGrid& grid() const;
  const std::vector<double>& samples() const;

  nlohmann::ordered_json to_json() const;

 private:
  struct Sampled;
  ProfileFamily family_ = ProfileFamily::Talenti;
  int N_ = 3;
  double A_ = 0.0;
  double nu_ = 1.0;
  double K_ = 1.0;
  double log_scale_ = 0.0;
  std::shared_ptr<const Sampled> sampled_;
};

/// w_mu of the family solving -Delta w = A w/|x|^2 + w^{2*-1}.
/// Errors: coupling-out-of-range (A < 0 or A >= Lambda_N), nonpositive-scale, dimension-too-small.
RadialProfile ground_state(int N, double A, double mu);

/// Normalized Talenti bubble C_r / (r^2 + rho^2)^{(N-2)/2}. Errors: nonpositive-scale.
RadialProfile talenti(int N, double r);

/// C_1(N) = (int (1+|x|^2)^{-N} dx)^{-(N-2)/(2N)}, computed by quadrature and cached.
double talenti_constant(int N);

struct FieldTerm {
  double amplitude = 1.0;
  RadialProfile profile;
  Point center;
};

/// Finite superposition u(x) = sum_i t_i phi_i(|x - c_i|). Empty means zero.
class Field {
 public:
  Field() = default;
  explicit Field(int N) : N_(N) {}

  static Field single(const RadialProfile& profile, const Point& center, double amplitude = 1.0);
  /// Single profile centered at the origin.
  static Field radial(const RadialProfile& profile, double amplitude = 1.0);

  Field& add(double amplitude, const RadialProfile& profile, const Point& center);

  int dimension() const { return N_; }
  bool empty() const { return terms_.empty(); }
  const std::vector<FieldTerm>& terms() const { return terms_; }
  /// t * u.
  Field times(double t) const;
  /// All centers at the origin.
  bool radial_about_origin() const;

  nlohmann::ordered_json to_json() const;

 private:
  int N_ = 0;
  std::vector<FieldTerm> terms_;
};

/// Single Talenti bubble at `center`.
Field talenti_bubble(int N, double r, const Point& center, double amplitude = 1.0);

/// mu^{-(N-2)/2} u(x / mu). Errors: nonpositive-scale.
Field scale_field(const Field& u, double mu);

/// Pointwise value. Errors: singular-evaluation at the center of a singular profile.
double evaluate(const Field& u, const Point& x);

/// Origin of R^N.
inline Point origin(int N) { return Point::Zero(N); }
/// Point from coordinates, padded with zeros to dimension N.
Point make_point(int N, std::initializer_list<double> coords);

}  // namespace critvar
