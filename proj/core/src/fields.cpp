#include "critvar/fields.hpp"

// pchip.hpp calls isnan unqualified and relies on the global declaration
#include <math.h>

#include <boost/math/interpolators/pchip.hpp>
#include <map>
#include <mutex>
#include <sstream>

namespace critvar {

const char* to_string(ProfileFamily family) noexcept {
  switch (family) {
    case ProfileFamily::GroundState: return "GroundState";
    case ProfileFamily::Talenti: return "Talenti";
    case ProfileFamily::GridSampled: return "GridSampled";
  }
  return "unknown";
}

struct RadialProfile::Sampled {
  RadialGrid grid;
  std::vector<double> values;
  boost::math::interpolators::pchip<std::vector<double>> interp;
  // log-slopes of v beyond each end, or NaN when the end value is not positive
  double left_slope;
  double right_slope;

  Sampled(const RadialGrid& g, const std::vector<double>& v)
      : grid(g),
        values(v),
        interp(std::vector<double>(g.log_nodes()), std::vector<double>(v)),
        left_slope(end_slope(v[1], v[0], g.log_step())),
        right_slope(end_slope(v[v.size() - 2], v.back(), g.log_step())) {}

  static double end_slope(double inner, double outer, double h) {
    if (!(inner > 0.0) || !(outer > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return (std::log(outer) - std::log(inner)) / h;
  }

  double value(double s) const {
    if (s < grid.log_min()) {
      if (std::isnan(left_slope)) return 0.0;
      return values.front() * std::exp(-left_slope * (s - grid.log_min()));
    }
    if (s > grid.log_max()) {
      if (std::isnan(right_slope)) return 0.0;
      return values.back() * std::exp(right_slope * (s - grid.log_max()));
    }
    return interp(s);
  }

  double slope(double s) const {
    if (s < grid.log_min()) return std::isnan(left_slope) ? 0.0 : -left_slope * value(s);
    if (s > grid.log_max()) return std::isnan(right_slope) ? 0.0 : right_slope * value(s);
    return interp.prime(s);
  }
};

namespace {

void require_scale(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    std::ostringstream os;
    os << "scale must be positive and finite, got " << mu;
    throw Error(ErrorCode::nonpositive_scale, os.str());
  }
}

// log(2 cosh y), stable for all y
double log_two_cosh(double y) {
  const double a = std::abs(y);
  return a + std::log1p(std::exp(-2.0 * a));
}

// sech^2 y, stable for all y
double sech2(double y) {
  const double e = std::exp(-2.0 * std::abs(y));
  return 4.0 * e / ((1.0 + e) * (1.0 + e));
}

}  // namespace

double talenti_constant(int N) {
  require_dimension(N);
  static std::mutex mutex;
  static std::map<int, double> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(N);
  if (it != cache.end()) return it->second;
  // int (1+rho^2)^{-N} rho^{N-1} drho = int (2 cosh s)^{-N} ds
  const RadialGrid grid = RadialGrid::lattice(N, 0.0, 0.01, -6000, 6000);
  const double I = integrate_log(grid, [N](double s) { return std::exp(-N * log_two_cosh(s)); });
  const double C = std::pow(I, -(N - 2.0) / (2.0 * N));
  cache.emplace(N, C);
  return C;
}

RadialProfile RadialProfile::ground_state(int N, double A, double mu) {
  require_dimension(N);
  require_scale(mu);
  const double Lambda = hardy_constant(N);
  if (!(A >= 0.0) || !(A < Lambda)) {
    std::ostringstream os;
    os << "ground state needs 0 <= A < " << Lambda << ", got A = " << A;
    throw Error(ErrorCode::coupling_out_of_range, os.str());
  }
  RadialProfile p;
  p.family_ = ProfileFamily::GroundState;
  p.N_ = N;
  p.A_ = A;
  p.nu_ = std::sqrt(1.0 - A / Lambda);
  p.K_ = std::pow(N * (N - 2.0) * p.nu_ * p.nu_, (N - 2.0) / 4.0);
  p.log_scale_ = std::log(mu);
  return p;
}

RadialProfile RadialProfile::talenti(int N, double r) {
  require_dimension(N);
  require_scale(r);
  RadialProfile p;
  p.family_ = ProfileFamily::Talenti;
  p.N_ = N;
  p.nu_ = 1.0;
  p.K_ = talenti_constant(N);
  p.log_scale_ = std::log(r);
  return p;
}

RadialProfile RadialProfile::grid_sampled(const RadialGrid& grid, std::vector<double> scaled_values) {
  if (static_cast<int>(scaled_values.size()) != grid.size())
    throw Error(ErrorCode::invalid_params, "sample count does not match the grid");
  if (grid.size() < 4) throw Error(ErrorCode::invalid_params, "sampled profile needs at least 4 nodes");
  for (double v : scaled_values)
    if (!std::isfinite(v)) throw Error(ErrorCode::invalid_params, "sampled values must be finite");
  RadialProfile p;
  p.family_ = ProfileFamily::GridSampled;
  p.N_ = grid.dimension();
  p.nu_ = 1.0;
  p.K_ = 1.0;
  p.log_scale_ = 0.0;
  p.sampled_ = std::make_shared<const Sampled>(grid, scaled_values);
  return p;
}

double RadialProfile::scaled_value(double s) const {
  if (sampled_) return sampled_->value(s - log_scale_);
  const double q = half_codim(N_);
  return K_ * std::exp(-q * log_two_cosh(nu_ * (s - log_scale_)));
}

double RadialProfile::scaled_derivative(double s) const {
  const double q = half_codim(N_);
  if (sampled_) {
    const double t = s - log_scale_;
    return sampled_->slope(t) - q * sampled_->value(t);
  }
  const double y = nu_ * (s - log_scale_);
  const double B = 1.0 + nu_ * std::tanh(y);
  return -q * B * scaled_value(s);
}

double RadialProfile::scaled_second_derivative(double s) const {
  const double q = half_codim(N_);
  if (sampled_) {
    // d/ds of the scaled derivative, then shift: rho^{q+2} phi'' = D' - (q+1) D
    const double eps = 1e-4;
    const double Dp = (scaled_derivative(s + eps) - scaled_derivative(s - eps)) / (2.0 * eps);
    return Dp - (q + 1.0) * scaled_derivative(s);
  }
  const double y = nu_ * (s - log_scale_);
  const double B = 1.0 + nu_ * std::tanh(y);
  const double v = scaled_value(s);
  return -q * v * (-q * B * B + nu_ * nu_ * sech2(y) - B);
}

double RadialProfile::value(double rho) const {
  const double q = half_codim(N_);
  if (rho > 0.0) {
    const double s = std::log(rho);
    return std::exp(-q * s) * scaled_value(s);
  }
  if (singular_at_center()) throw Error(ErrorCode::singular_evaluation, "profile is singular at its center");
  if (sampled_) return value(sampled_->grid.r_min() * scale());
  // nu = 1: phi(0) = K mu^{-q}
  return K_ * std::exp(-q * log_scale_);
}

double RadialProfile::derivative(double rho) const {
  if (!(rho > 0.0)) return 0.0;
  const double q = half_codim(N_);
  const double s = std::log(rho);
  return std::exp(-(q + 1.0) * s) * scaled_derivative(s);
}

double RadialProfile::second_derivative(double rho) const {
  if (!(rho > 0.0)) throw Error(ErrorCode::singular_evaluation, "second derivative requested at the center");
  const double q = half_codim(N_);
  const double s = std::log(rho);
  return std::exp(-(q + 2.0) * s) * scaled_second_derivative(s);
}

bool RadialProfile::singular_at_center() const {
  if (sampled_) {
    // v ~ e^{kappa s} with kappa = -left_slope, so phi ~ rho^{kappa - q} near 0
    return !std::isnan(sampled_->left_slope) && -sampled_->left_slope < half_codim(N_) - 1e-9;
  }
  return nu_ < 1.0;
}

std::pair<double, double> RadialProfile::log_support(double tol) const {
  if (sampled_) return {sampled_->grid.log_min() + log_scale_, sampled_->grid.log_max() + log_scale_};
  const double L = std::log(1.0 / tol) / ((N_ - 2.0) * nu_);
  return {log_scale_ - L, log_scale_ + L};
}

RadialProfile RadialProfile::scaled(double mu) const {
  require_scale(mu);
  RadialProfile p = *this;
  p.log_scale_ += std::log(mu);
  return p;
}

const RadialGrid& RadialProfile::grid() const {
  if (!sampled_) throw Error(ErrorCode::invalid_params, "closed-form profile has no sample grid");
  return sampled_->grid;
}

const std::vector<double>& RadialProfile::samples() const {
  if (!sampled_) throw Error(ErrorCode::invalid_params, "closed-form profile has no samples");
  return sampled_->values;
}

nlohmann::ordered_json RadialProfile::to_json() const {
  nlohmann::ordered_json j;
  j["family"] = to_string(family_);
  j["N"] = N_;
  switch (family_) {
    case ProfileFamily::GroundState:
      j["A"] = A_;
      j["mu"] = scale();
      j["nu"] = nu_;
      break;
    case ProfileFamily::Talenti:
      j["r"] = scale();
      j["C_1"] = K_;
      break;
    case ProfileFamily::GridSampled:
      j["log_min"] = sampled_->grid.log_min() + log_scale_;
      j["log_step"] = sampled_->grid.log_step();
      j["M"] = sampled_->grid.size();
      j["scaled_values"] = sampled_->values;
      break;
  }
  return j;
}

RadialProfile ground_state(int N, double A, double mu) { return RadialProfile::ground_state(N, A, mu); }

RadialProfile talenti(int N, double r) { return RadialProfile::talenti(N, r); }

Field Field::single(const RadialProfile& profile, const Point& center, double amplitude) {
  Field f(profile.dimension());
  f.add(amplitude, profile, center);
  return f;
}

Field Field::radial(const RadialProfile& profile, double amplitude) {
  return single(profile, origin(profile.dimension()), amplitude);
}

Field& Field::add(double amplitude, const RadialProfile& profile, const Point& center) {
  if (N_ == 0) N_ = profile.dimension();
  if (profile.dimension() != N_ || center.size() != N_)
    throw Error(ErrorCode::invalid_params, "field term dimension mismatch");
  terms_.push_back({amplitude, profile, center});
  return *this;
}

Field Field::times(double t) const {
  Field f = *this;
  for (auto& term : f.terms_) term.amplitude *= t;
  return f;
}

bool Field::radial_about_origin() const {
  for (const auto& term : terms_)
    if (term.center.norm() != 0.0) return false;
  return true;
}

nlohmann::ordered_json Field::to_json() const {
  nlohmann::ordered_json j;
  j["N"] = N_;
  nlohmann::ordered_json terms = nlohmann::ordered_json::array();
  for (const auto& term : terms_) {
    nlohmann::ordered_json t;
    t["amplitude"] = term.amplitude;
    t["center"] = std::vector<double>(term.center.data(), term.center.data() + term.center.size());
    t["profile"] = term.profile.to_json();
    terms.push_back(t);
  }
  j["terms"] = terms;
  return j;
}

Field talenti_bubble(int N, double r, const Point& center, double amplitude) {
  return Field::single(talenti(N, r), center, amplitude);
}

Field scale_field(const Field& u, double mu) {
  require_scale(mu);
  Field out(u.dimension());
  for (const auto& term : u.terms()) out.add(term.amplitude, term.profile.scaled(mu), Point(mu * term.center));
  return out;
}

double evaluate(const Field& u, const Point& x) {
  double sum = 0.0;
  for (const auto& term : u.terms()) sum += term.amplitude * term.profile.value((x - term.center).norm());
  return sum;
}

Point make_point(int N, std::initializer_list<double> coords) {
  Point p = Point::Zero(N);
  int i = 0;
  for (double c : coords) {
    if (i >= N) throw Error(ErrorCode::invalid_params, "too many coordinates for dimension");
    p(i++) = c;
  }
  return p;
}

}  // namespace critvar
