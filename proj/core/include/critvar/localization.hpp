#pragma once

#include <string>
#include <vector>

#include "critvar/energy.hpp"
#include "json.hpp"

namespace critvar {

/// Geometry attached to a finite set of maxima a_1..a_m of k.
struct PeakFrame {
  int N = 3;
  std::vector<Point> maxima;
  /// min(1, half the smallest pairwise distance): the balls B_{r0}(a_j) are disjoint.
  double r0 = 1.0;
  /// r0 / 3.
  double delta = 1.0 / 3.0;
  /// Truncation radius of xi; every maximum lies inside B_{R0 - 1}.
  double R0 = 2.0;

  nlohmann::ordered_json to_json() const;
};

/// Frame for explicit maxima. R0 defaults to the first power of two with
/// every maximum inside B_{R0 - 1}. Errors: invalid-params (no maxima, or R0 too small).
PeakFrame make_peak_frame(int N, std::vector<Point> maxima, std::optional<double> R0 = std::nullopt);
/// Frame for the maxima of k, with R0 taken from (K3) when it holds.
/// Errors: hypothesis-violated (maxima empty or not finite).
PeakFrame make_peak_frame(const CoefficientProfile& k);

/// T_j(u) = int psi_j |grad u|^2 / int |grad u|^2, psi_j = min(1, |x - a_j|).
/// `j` is zero-based. Errors: zero-field, invalid-params (j out of range).
double t_j(const Field& u, const PeakFrame& frame, int j, const QuadratureSettings& set);
/// All T_j.
std::vector<double> t_all(const Field& u, const PeakFrame& frame, const QuadratureSettings& set);

/// Both sides of the inequality int |grad u|^2 >= 3 int_{|x - a_j| > r0} |grad u|^2,
/// which must hold whenever T_j(u) <= delta.
struct BallInequality {
  double t = 0.0;
  double total = 0.0;
  double outside = 0.0;
  bool applies = false;  // T_j <= delta
  bool holds = false;    // total >= 3 outside
  nlohmann::ordered_json to_json() const;
};
BallInequality ball_inequality(const Field& u, const PeakFrame& frame, int j, const QuadratureSettings& set);

struct SeparationReport {
  /// For each field, the peaks j with T_j <= delta.
  std::vector<std::vector<int>> localized;
  std::vector<std::vector<double>> t_values;
  /// Every field localizes at one peak at most.
  bool unique = true;
  /// Every field localizes at exactly one peak and no two fields share one.
  bool distinct = true;
  nlohmann::ordered_json to_json() const;
};
SeparationReport separation_check(const std::vector<Field>& fields, const PeakFrame& frame,
                                  const QuadratureSettings& set);

/// Xi(u) = int xi |grad u|^2 / int |grad u|^2 with xi(x) = x inside B_{R0} and
/// R0 x/|x| outside. Fields centered at the origin return 0 by symmetry.
/// Errors: zero-field, unsupported-geometry (centers not on a line through the origin).
Point xi_map(const Field& u, const PeakFrame& frame, const QuadratureSettings& set);

/// Dirichlet, critical and Hardy masses over a ball.
struct BallMasses {
  Point center;
  double radius = 0.0;
  double dirichlet = 0.0;
  double critical = 0.0;
  double hardy = 0.0;
  nlohmann::ordered_json to_json() const;
};
BallMasses ball_masses(const Field& u, const Point& center, double radius, const QuadratureSettings& set);

struct ConcentrationReport {
  std::vector<double> radii;
  /// int_{|x|>R} |grad u|^2, |u|^{2*}, u^2/|x|^2.
  std::vector<double> dirichlet_tail;
  std::vector<double> critical_tail;
  std::vector<double> hardy_tail;
  /// Totals over R^N.
  double dirichlet = 0.0;
  double critical = 0.0;
  double hardy = 0.0;
  /// Slopes of log(tail) against log(R) over the last two radii with positive tails.
  std::optional<double> dirichlet_exponent;
  std::optional<double> critical_exponent;
  std::optional<double> hardy_exponent;
  /// Balls B_R(0) for each R of the sweep.
  std::vector<BallMasses> origin_balls;
  /// Balls B_{r0}(a_j) when k has finitely many maxima.
  std::vector<BallMasses> peak_balls;

  nlohmann::ordered_json to_json() const;
  /// Rows "R,mu_R,nu_R,gamma_R" with a header line.
  std::string to_csv() const;
};

/// Errors: zero-field, invalid-params (empty or nonpositive radii).
ConcentrationReport tail_masses(const Field& u, const ProblemSpec& spec, const std::vector<double>& radii);

/// A localized solution from a lambda sweep.
struct LocalizedSolution {
  double lambda = 0.0;
  int peak = 0;
  Field field;
};

struct PeakConcentration {
  int peak = 0;
  std::vector<double> lambdas;
  /// Share of the Dirichlet mass inside B_{r0/10}(a_j).
  std::vector<double> fraction;
  std::vector<double> dirichlet;
  std::vector<double> critical;
  bool fraction_increasing = false;
  double final_fraction = 0.0;
  /// |D - S^{N/2}||k||^{-(N-2)/2}| / S^{N/2}||k||^{-(N-2)/2} at the smallest lambda.
  double dirichlet_error = 0.0;
  double critical_error = 0.0;
  nlohmann::ordered_json to_json() const;
};

struct ConcentrationVerification {
  double dirichlet_limit = 0.0;
  double critical_limit = 0.0;
  std::vector<PeakConcentration> peaks;
  nlohmann::ordered_json to_json() const;
};

/// Per peak, sorts the solutions by decreasing lambda and measures how the
/// Dirichlet mass gathers at a_j against the limits S^{N/2}||k||^{-(N-2)/2}
/// (Dirichlet) and S^{N/2}||k||^{-N/2} (critical).
ConcentrationVerification concentration_verify(const std::vector<LocalizedSolution>& results,
                                               const PeakFrame& frame, const ProblemSpec& spec);

/// Number of connected components of the delta-neighbourhood of the maxima
/// of k. For the k1 example the maxima are the spheres |x| = 1/2 + 1/(n pi)
/// together with their limit |x| = 1/2. Errors: invalid-params (delta <= 0),
/// hypothesis-violated (other infinite maxima sets).
int separated_maxima_count(const CoefficientProfile& k, double delta);

}  // namespace critvar
