#pragma once

#include <optional>
#include <string>
#include <vector>

#include "critvar/fields.hpp"
#include "json.hpp"

namespace critvar {

/// Radial building blocks of coefficient presets. Each atom is a function
/// a(rho) of the distance rho = |x - center|.
enum class AtomKind {
  PowerBump,    // c rho^p exp(-rho^2/R^2)
  InverseTail,  // c rho^2 (R^2 + rho^2)^{-(p+2)/2}, ~ c rho^{-p} at infinity
  RadialPower,  // c (rho/R)^p / (1 + (rho/R)^p), increasing to c
  Gaussian,     // c exp(-rho^2/R^2)
  FlatTop,      // c exp(-x - x^2), x = (rho/R)^p: c - a(rho) ~ c (rho/R)^p at the top
  Oscillating,  // the k_1 example: eta(rho)(1 - |sin(1/(rho - 1/2))|^p) on [0, 1]
};

struct Atom {
  AtomKind kind = AtomKind::Gaussian;
  Point center;
  double amplitude = 0.0;
  double radius = 1.0;
  double exponent = 0.0;

  double value(double rho) const;
  /// d a / d rho.
  double derivative(double rho) const;
  double limit_at_infinity() const;
  bool differentiable() const { return kind != AtomKind::Oscillating; }
  /// Radii where |a| attains its extreme values, used to locate sup and inf.
  std::vector<double> extremal_radii() const;
};

/// Where a coefficient attains its maximum.
struct MaximaSet {
  std::vector<Point> points;
  /// True for sets that are not finite (spheres, accumulating families).
  bool infinite = false;
  /// For infinite radial sets: the first few sphere radii, and where they accumulate.
  std::vector<double> sphere_radii;
  double outermost_radius = 0.0;
};

/// h or k: a constant plus finitely many radial atoms.
class CoefficientProfile {
 public:
  CoefficientProfile() = default;
  CoefficientProfile(int N, std::string tag, nlohmann::ordered_json params, double constant,
                     std::vector<Atom> atoms);

  int dimension() const { return N_; }
  const std::string& tag() const { return tag_; }
  const nlohmann::ordered_json& params() const { return params_; }
  double constant() const { return constant_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  double value_at(const Point& x) const;
  double value_at_zero() const;
  /// Limit (limsup) at infinity, declared by the preset.
  double limit_at_infinity() const;
  /// sup |value|.
  double sup_norm() const { return sup_norm_; }
  /// sup value.
  double max_value() const { return max_value_; }
  /// inf value.
  double min_value() const { return min_value_; }
  const MaximaSet& maxima() const { return maxima_; }
  /// All atoms centered at the origin.
  bool radial() const;
  bool differentiable() const;
  bool is_constant() const { return atoms_.empty(); }
  /// Declared flatness exponent theta of the maxima, when the preset has one.
  std::optional<double> flatness() const { return flatness_; }
  /// <grad coeff(x), x>. Errors: nondifferentiable-preset.
  double pohozaev_density(const Point& x) const;
  /// Value along a ray from the origin; only meaningful for radial profiles.
  double radial_value(double rho) const;

  /// c * coeff.
  CoefficientProfile scaled(double c) const;
  /// coeff + c.
  CoefficientProfile shifted(double c) const;

  nlohmann::ordered_json to_json() const;

 private:
  void finalize();
  int N_ = 3;
  std::string tag_ = "zero";
  nlohmann::ordered_json params_ = nlohmann::ordered_json::object();
  double constant_ = 0.0;
  std::vector<Atom> atoms_;
  std::optional<double> flatness_;
  double sup_norm_ = 0.0;
  double max_value_ = 0.0;
  double min_value_ = 0.0;
  MaximaSet maxima_;
  friend CoefficientProfile make_k_preset(const std::string&, const nlohmann::ordered_json&, int);
  friend CoefficientProfile make_h_preset(const std::string&, const nlohmann::ordered_json&, int);
};

/// Presets for h: constant, zero, bump_near_zero, bump_at_infinity, radial_power, gaussian_bump.
/// Errors: invalid-params.
CoefficientProfile make_h_preset(const std::string& tag, const nlohmann::ordered_json& params, int N);

/// Presets for k: constant_one, constant, two_peak, m_peak, k1_example, sign_changing,
/// bump_near_zero, gaussian_bump. Errors: invalid-params, theta-out-of-range.
CoefficientProfile make_k_preset(const std::string& tag, const nlohmann::ordered_json& params, int N);

/// The zero coefficient and the constant one.
CoefficientProfile zero_coefficient(int N);
CoefficientProfile constant_coefficient(int N, double value);

struct HypothesisEntry {
  std::string name;
  bool holds = false;
  nlohmann::ordered_json witness = nlohmann::ordered_json::object();
};

struct HypothesisReport {
  std::vector<HypothesisEntry> entries;
  bool all() const;
  bool holds(const std::string& name) const;
  const HypothesisEntry& get(const std::string& name) const;
  nlohmann::ordered_json to_json() const;
};

/// Deterministic probe points: radii log-uniform in [1e-6, 1e6], directions
/// uniform on spheres, plus the origin and the atom centers.
std::vector<Point> probe_points(int N, int count, unsigned long long seed = 0x5eed1234ULL);

/// (h0) A + h(0) > 0, (h1) boundedness and continuity on probes, (h2) c0 = Lambda - A - ||h|| > 0.
HypothesisReport check_h_hypotheses(const CoefficientProfile& h, double A, int N);

/// (K0) ||k|| > max(k(0), k(inf)), (K1) finite maxima, (K2) shell-fitted flatness,
/// (K3) tail gap (R0, d0).
HypothesisReport check_k_hypotheses(const CoefficientProfile& k, int N);

/// int (h - H) w_mu^2 / |x|^2 with w_mu the ground state at coupling A + H,
/// H = max(h(0), h(inf)). Errors: coupling-out-of-range.
double condition_H_integral(const CoefficientProfile& h, double A, int N, double mu);

/// int (k - max(k(0), k(inf))) w_mu^{2*} with w_mu the ground state at coupling lambda.
/// Errors: coupling-out-of-range, not-radial.
double condition_k_integral(const CoefficientProfile& k, double lambda, int N, double mu);

}  // namespace critvar
