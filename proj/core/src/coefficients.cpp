#include "critvar/coefficients.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "integrals.hpp"

namespace critvar {
namespace {

using json = nlohmann::ordered_json;

constexpr double kPi = 3.14159265358979323846;

// eta of the oscillating example: smoothstep from 0 at r = 0 to 1 at r = 1/2
double smoothstep_half(double r) {
  if (r <= 0.0) return 0.0;
  if (r >= 0.5) return 1.0;
  const double t = 2.0 * r;
  return t * t * (3.0 - 2.0 * t);
}

double oscillating_core(double r, double theta) {
  if (r == 0.5) return 1.0;
  return smoothstep_half(r) * (1.0 - std::pow(std::abs(std::sin(1.0 / (r - 0.5))), theta));
}

[[noreturn]] void bad_param(const std::string& tag, const std::string& what) {
  throw Error(ErrorCode::invalid_params, "preset '" + tag + "': " + what);
}

// Reads named numeric parameters with defaults and records the resolved values.
class ParamReader {
 public:
  ParamReader(std::string tag, const json& params, int N) : tag_(std::move(tag)), params_(params), N_(N) {
    if (!params_.is_null() && !params_.is_object()) bad_param(tag_, "parameters must be a mapping");
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    double value = 0.0;
    if (params_.is_object() && params_.contains(key)) {
      const json& v = params_.at(key);
      if (!v.is_number()) bad_param(tag_, "'" + key + "' must be a number");
      value = v.get<double>();
      if (!std::isfinite(value)) bad_param(tag_, "'" + key + "' must be finite");
    } else if (fallback) {
      value = *fallback;
    } else {
      bad_param(tag_, "missing parameter '" + key + "'");
    }
    resolved_[key] = value;
    return value;
  }

  double positive(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const double v = number(key, fallback);
    if (!(v > 0.0)) bad_param(tag_, "'" + key + "' must be positive");
    return v;
  }

  Point point(const std::string& key, std::optional<Point> fallback = std::nullopt) {
    Point p = Point::Zero(N_);
    if (params_.is_object() && params_.contains(key)) {
      const json& v = params_.at(key);
      if (!v.is_array() || v.empty() || static_cast<int>(v.size()) > N_)
        bad_param(tag_, "'" + key + "' must be a list of at most N numbers");
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) bad_param(tag_, "'" + key + "' must contain numbers");
        p(static_cast<Eigen::Index>(i)) = v[i].get<double>();
      }
    } else if (fallback) {
      p = *fallback;
    } else {
      bad_param(tag_, "missing parameter '" + key + "'");
    }
    resolved_[key] = std::vector<double>(p.data(), p.data() + p.size());
    return p;
  }

  int integer(const std::string& key, int fallback) {
    int value = fallback;
    if (params_.is_object() && params_.contains(key)) {
      const json& v = params_.at(key);
      if (!v.is_number_integer()) bad_param(tag_, "'" + key + "' must be an integer");
      value = v.get<int>();
    }
    resolved_[key] = value;
    return value;
  }

  // Flat-top order theta of (K2), restricted to 2 < theta < N.
  double theta(double fallback) {
    const double t = number("theta", fallback);
    if (!(t > 2.0) || !(t < N_)) {
      std::ostringstream os;
      os << "preset '" << tag_ << "': theta = " << t << " outside (2, " << N_ << ")";
      throw Error(ErrorCode::theta_out_of_range, os.str());
    }
    return t;
  }

  const json& resolved() const { return resolved_; }

 private:
  std::string tag_;
  const json& params_;
  int N_;
  json resolved_ = json::object();
};

Atom make_atom(AtomKind kind, const Point& center, double amplitude, double radius, double exponent) {
  Atom a;
  a.kind = kind;
  a.center = center;
  a.amplitude = amplitude;
  a.radius = radius;
  a.exponent = exponent;
  return a;
}

Point unit(int N, int axis) {
  Point e = Point::Zero(N);
  e(axis) = 1.0;
  return e;
}

}  // namespace

double Atom::value(double rho) const {
  const double c = amplitude;
  const double R = radius;
  const double p = exponent;
  switch (kind) {
    case AtomKind::PowerBump:
      return rho == 0.0 ? 0.0 : c * std::pow(rho, p) * std::exp(-rho * rho / (R * R));
    case AtomKind::InverseTail:
      return c * rho * rho * std::pow(R * R + rho * rho, -(p + 2.0) / 2.0);
    case AtomKind::RadialPower: {
      const double x = std::pow(rho / R, p);
      return std::isinf(x) ? c : c * x / (1.0 + x);
    }
    case AtomKind::Gaussian:
      return c * std::exp(-rho * rho / (R * R));
    case AtomKind::FlatTop: {
      const double x = std::pow(rho / R, p);
      return c * std::exp(-x - x * x);
    }
    case AtomKind::Oscillating:
      if (rho <= 1.0) return c * oscillating_core(rho, p);
      return c * oscillating_core(1.0, p) * std::exp(-(rho - 1.0));
  }
  return 0.0;
}

double Atom::derivative(double rho) const {
  const double c = amplitude;
  const double R = radius;
  const double p = exponent;
  switch (kind) {
    case AtomKind::PowerBump:
      if (rho == 0.0) return 0.0;
      return value(rho) * (p / rho - 2.0 * rho / (R * R));
    case AtomKind::InverseTail:
      if (rho == 0.0) return 0.0;
      return value(rho) * (2.0 / rho - (p + 2.0) * rho / (R * R + rho * rho));
    case AtomKind::RadialPower: {
      if (rho == 0.0) return 0.0;
      const double x = std::pow(rho / R, p);
      if (std::isinf(x)) return 0.0;
      return c * p * x / (rho * (1.0 + x) * (1.0 + x));
    }
    case AtomKind::Gaussian:
      return -2.0 * rho / (R * R) * value(rho);
    case AtomKind::FlatTop: {
      if (rho == 0.0) return 0.0;
      const double x = std::pow(rho / R, p);
      return -value(rho) * (1.0 + 2.0 * x) * p * x / rho;
    }
    case AtomKind::Oscillating:
      throw Error(ErrorCode::nondifferentiable_preset, "the oscillating atom is not differentiable");
  }
  return 0.0;
}

double Atom::limit_at_infinity() const { return kind == AtomKind::RadialPower ? amplitude : 0.0; }

std::vector<double> Atom::extremal_radii() const {
  switch (kind) {
    case AtomKind::PowerBump:
      return {radius * std::sqrt(exponent / 2.0)};
    case AtomKind::InverseTail:
      return {radius * std::sqrt(2.0 / exponent)};
    case AtomKind::RadialPower:
      return {0.0};
    case AtomKind::Gaussian:
    case AtomKind::FlatTop:
      return {0.0};
    case AtomKind::Oscillating: {
      std::vector<double> r{0.0};
      for (int n = 1; n <= 8; ++n) r.push_back(0.5 + 1.0 / (n * kPi));
      return r;
    }
  }
  return {0.0};
}

CoefficientProfile::CoefficientProfile(int N, std::string tag, nlohmann::ordered_json params, double constant,
                                       std::vector<Atom> atoms)
    : N_(N), tag_(std::move(tag)), params_(std::move(params)), constant_(constant), atoms_(std::move(atoms)) {
  require_dimension(N);
  for (const Atom& a : atoms_)
    if (a.center.size() != N) throw Error(ErrorCode::invalid_params, "atom center dimension mismatch");
  finalize();
}

double CoefficientProfile::value_at(const Point& x) const {
  double v = constant_;
  for (const Atom& a : atoms_) v += a.value((x - a.center).norm());
  return v;
}

double CoefficientProfile::value_at_zero() const { return value_at(origin(N_)); }

double CoefficientProfile::limit_at_infinity() const {
  double v = constant_;
  for (const Atom& a : atoms_) v += a.limit_at_infinity();
  return v;
}

bool CoefficientProfile::radial() const {
  return std::all_of(atoms_.begin(), atoms_.end(), [](const Atom& a) { return a.center.norm() == 0.0; });
}

bool CoefficientProfile::differentiable() const {
  return std::all_of(atoms_.begin(), atoms_.end(), [](const Atom& a) { return a.differentiable(); });
}

double CoefficientProfile::pohozaev_density(const Point& x) const {
  double v = 0.0;
  for (const Atom& a : atoms_) {
    if (!a.differentiable())
      throw Error(ErrorCode::nondifferentiable_preset, "preset '" + tag_ + "' has no gradient");
    const Point rel = x - a.center;
    const double r = rel.norm();
    if (r == 0.0) continue;
    v += a.derivative(r) * rel.dot(x) / r;
  }
  return v;
}

double CoefficientProfile::radial_value(double rho) const { return value_at(rho * unit(N_, 0)); }

CoefficientProfile CoefficientProfile::scaled(double c) const {
  CoefficientProfile out = *this;
  out.constant_ *= c;
  for (Atom& a : out.atoms_) a.amplitude *= c;
  out.params_ = json{{"base", params_}, {"base_tag", tag_}, {"scale", c}};
  out.tag_ = "scaled";
  out.finalize();
  if (c > 0.0) out.maxima_ = maxima_;
  return out;
}

CoefficientProfile CoefficientProfile::shifted(double c) const {
  CoefficientProfile out = *this;
  out.constant_ += c;
  out.params_ = json{{"base", params_}, {"base_tag", tag_}, {"shift", c}};
  out.tag_ = "shifted";
  out.finalize();
  out.maxima_ = maxima_;
  return out;
}

// Candidate extremal points: the origin, every atom center, and the points at
// each atom's extremal radii along the line through the origin and the center.
// Atoms of every preset are separated enough that the extremes of the sum sit
// at these candidates; presets with accumulating maxima override the set.
void CoefficientProfile::finalize() {
  struct Candidate {
    Point x;
    bool sphere;  // radial atom at the origin with a positive extremal radius
    double radius;
  };
  std::vector<Candidate> cand;
  cand.push_back({origin(N_), false, 0.0});
  for (const Atom& a : atoms_) {
    const bool at_origin = a.center.norm() == 0.0;
    const Point dir = at_origin ? unit(N_, 0) : Point(a.center.normalized());
    cand.push_back({a.center, false, 0.0});
    for (double r : a.extremal_radii()) {
      if (r <= 0.0) continue;
      cand.push_back({a.center + r * dir, at_origin, r});
      if (!at_origin) cand.push_back({a.center - r * dir, false, 0.0});
    }
  }
  const double inf_value = limit_at_infinity();
  max_value_ = inf_value;
  min_value_ = inf_value;
  for (const Candidate& c : cand) {
    const double v = value_at(c.x);
    max_value_ = std::max(max_value_, v);
    min_value_ = std::min(min_value_, v);
  }
  sup_norm_ = std::max(std::abs(max_value_), std::abs(min_value_));

  maxima_ = MaximaSet{};
  if (atoms_.empty()) {
    maxima_.infinite = true;  // every point is a maximum
    return;
  }
  const double tol = 1e-12 * std::max(1.0, std::abs(max_value_));
  for (const Candidate& c : cand) {
    if (value_at(c.x) < max_value_ - tol) continue;
    if (c.sphere) {
      maxima_.infinite = true;
      maxima_.sphere_radii.push_back(c.radius);
      maxima_.outermost_radius = std::max(maxima_.outermost_radius, c.radius);
      continue;
    }
    const bool seen = std::any_of(maxima_.points.begin(), maxima_.points.end(),
                                  [&](const Point& p) { return (p - c.x).norm() <= 1e-12 * (1.0 + p.norm()); });
    if (!seen) {
      maxima_.points.push_back(c.x);
      maxima_.outermost_radius = std::max(maxima_.outermost_radius, c.x.norm());
    }
  }
}

json CoefficientProfile::to_json() const {
  json j;
  j["tag"] = tag_;
  j["params"] = params_;
  j["value_at_zero"] = value_at_zero();
  j["limit_at_infinity"] = limit_at_infinity();
  j["sup_norm"] = sup_norm_;
  j["max_value"] = max_value_;
  json maxima;
  json points = json::array();
  for (const Point& p : maxima_.points) points.push_back(std::vector<double>(p.data(), p.data() + p.size()));
  maxima["points"] = points;
  maxima["infinite"] = maxima_.infinite;
  if (!maxima_.sphere_radii.empty()) maxima["sphere_radii"] = maxima_.sphere_radii;
  j["maxima"] = maxima;
  if (flatness_) j["theta"] = *flatness_;
  return j;
}

CoefficientProfile zero_coefficient(int N) { return CoefficientProfile(N, "zero", json::object(), 0.0, {}); }

CoefficientProfile constant_coefficient(int N, double value) {
  return CoefficientProfile(N, "constant", json{{"value", value}}, value, {});
}

CoefficientProfile make_h_preset(const std::string& tag, const json& params, int N) {
  require_dimension(N);
  ParamReader in(tag, params, N);
  double constant = 0.0;
  std::vector<Atom> atoms;
  const Point o = origin(N);
  if (tag == "zero") {
  } else if (tag == "constant") {
    constant = in.number("value");
  } else if (tag == "bump_near_zero") {
    // h(0) + c1 rho^beta near the origin, returning to h(0) at infinity
    constant = in.number("h0", 0.0);
    const double c1 = in.positive("c1");
    const double beta = in.positive("exponent");
    const double R = in.positive("radius", 1.0);
    atoms.push_back(make_atom(AtomKind::PowerBump, o, c1, R, beta));
  } else if (tag == "bump_at_infinity") {
    // h(inf) + c2 rho^{-beta} for large rho, equal to h(inf) at the origin
    constant = in.number("h_inf", 0.0);
    const double c2 = in.positive("c2");
    const double beta = in.positive("exponent");
    const double R = in.positive("radius", 1.0);
    atoms.push_back(make_atom(AtomKind::InverseTail, o, c2, R, beta));
  } else if (tag == "radial_power") {
    constant = in.number("base", 0.0);
    const double c = in.number("amplitude");
    const double p = in.positive("exponent", 2.0);
    const double R = in.positive("radius", 1.0);
    atoms.push_back(make_atom(AtomKind::RadialPower, o, c, R, p));
  } else if (tag == "gaussian_bump") {
    constant = in.number("base", 0.0);
    const Point c = in.point("center", o);
    const double w = in.positive("width");
    const double height = in.number("height");
    atoms.push_back(make_atom(AtomKind::Gaussian, c, height, w, 0.0));
  } else {
    bad_param(tag, "unknown h preset");
  }
  return CoefficientProfile(N, tag, in.resolved(), constant, std::move(atoms));
}

CoefficientProfile make_k_preset(const std::string& tag, const json& params, int N) {
  require_dimension(N);
  ParamReader in(tag, params, N);
  double constant = 0.0;
  std::vector<Atom> atoms;
  std::optional<double> flatness;
  std::optional<MaximaSet> maxima;
  const Point o = origin(N);

  // Flat-top peaks of equal height; optional flat-top plateau k0 at the origin.
  auto add_peaks = [&](const std::vector<Point>& centers, double theta) {
    const double height = in.positive("height", 1.0);
    const double width = in.positive("width", 0.25);
    for (const Point& a : centers) atoms.push_back(make_atom(AtomKind::FlatTop, a, height, width, theta));
    const double k0 = in.number("k0", 0.0);
    if (k0 != 0.0) atoms.push_back(make_atom(AtomKind::FlatTop, o, k0, 0.5, theta));
    flatness = theta;
  };

  if (tag == "constant_one") {
    constant = 1.0;
  } else if (tag == "constant") {
    constant = in.number("value");
  } else if (tag == "two_peak") {
    const double theta = in.theta(2.5);
    const Point a1 = in.point("a1", 2.0 * unit(N, 0));
    const Point a2 = in.point("a2", -2.0 * unit(N, 0));
    add_peaks({a1, a2}, theta);
  } else if (tag == "m_peak") {
    const double theta = in.theta(2.5);
    const int m = in.integer("m", 3);
    if (m < 1) bad_param(tag, "'m' must be at least 1");
    const double R = in.positive("ring_radius", 2.0);
    std::vector<Point> centers;
    for (int j = 0; j < m; ++j) {
      const double phi = 2.0 * kPi * j / m;
      Point a = Point::Zero(N);
      a(0) = R * std::cos(phi);
      a(1) = R * std::sin(phi);
      centers.push_back(a);
    }
    add_peaks(centers, theta);
  } else if (tag == "k1_example") {
    const double theta = in.theta(2.5);
    atoms.push_back(make_atom(AtomKind::Oscillating, o, 1.0, 1.0, theta));
    flatness = theta;
    MaximaSet set;
    set.infinite = true;
    for (int n = 1; n <= 8; ++n) set.sphere_radii.push_back(0.5 + 1.0 / (n * kPi));
    set.outermost_radius = set.sphere_radii.front();
    maxima = set;
  } else if (tag == "sign_changing") {
    // two flat-top peaks over a negative well at the origin
    const double theta = in.theta(2.5);
    const Point a1 = in.point("a1", 2.0 * unit(N, 0));
    const Point a2 = in.point("a2", -2.0 * unit(N, 0));
    const double depth = in.positive("depth", 0.5);
    const double well = in.positive("well_radius", 1.0);
    add_peaks({a1, a2}, theta);
    atoms.push_back(make_atom(AtomKind::Gaussian, o, -depth, well, 0.0));
  } else if (tag == "bump_near_zero") {
    // k(0) + c1 rho^beta near the origin, returning to k(0) at infinity
    constant = in.positive("k0", 1.0);
    const double c1 = in.positive("c1");
    const double beta = in.positive("exponent");
    const double R = in.positive("radius", 1.0);
    atoms.push_back(make_atom(AtomKind::PowerBump, o, c1, R, beta));
  } else if (tag == "gaussian_bump") {
    constant = in.number("base", 0.0);
    const Point c = in.point("center", o);
    const double w = in.positive("width");
    const double height = in.number("height");
    atoms.push_back(make_atom(AtomKind::Gaussian, c, height, w, 0.0));
  } else {
    bad_param(tag, "unknown k preset");
  }
  CoefficientProfile k(N, tag, in.resolved(), constant, std::move(atoms));
  k.flatness_ = flatness;
  if (maxima) k.maxima_ = *maxima;
  return k;
}

bool HypothesisReport::all() const {
  return std::all_of(entries.begin(), entries.end(), [](const HypothesisEntry& e) { return e.holds; });
}

bool HypothesisReport::holds(const std::string& name) const { return get(name).holds; }

const HypothesisEntry& HypothesisReport::get(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return e;
  throw Error(ErrorCode::invalid_params, "no hypothesis named '" + name + "' in report");
}

json HypothesisReport::to_json() const {
  json j = json::object();
  for (const auto& e : entries) j[e.name] = json{{"holds", e.holds}, {"witness", e.witness}};
  return j;
}

std::vector<Point> probe_points(int N, int count, unsigned long long seed) {
  require_dimension(N);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> logr(std::log(1e-6), std::log(1e6));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Point> out;
  out.reserve(count + 1);
  out.push_back(origin(N));
  for (int i = 0; i < count; ++i) {
    Point d(N);
    do {
      for (int k = 0; k < N; ++k) d(k) = gauss(rng);
    } while (d.norm() == 0.0);
    out.push_back(std::exp(logr(rng)) * d.normalized());
  }
  return out;
}

namespace {

std::vector<Point> probes_with_centers(const CoefficientProfile& c, int count) {
  std::vector<Point> pts = probe_points(c.dimension(), count);
  for (const Atom& a : c.atoms()) pts.push_back(a.center);
  return pts;
}

json point_json(const Point& p) { return std::vector<double>(p.data(), p.data() + p.size()); }

// sup |k| over |x| >= R, sampled on radii R 2^{j/8} along the coordinate axes
// and along the directions of the atom centers, together with the limit.
double tail_sup(const CoefficientProfile& k, double R) {
  const int N = k.dimension();
  std::vector<Point> dirs;
  for (int i = 0; i < N; ++i) {
    dirs.push_back(unit(N, i));
    dirs.push_back(-unit(N, i));
  }
  for (const Atom& a : k.atoms())
    if (a.center.norm() > 0.0) dirs.push_back(a.center.normalized());
  double sup = std::abs(k.limit_at_infinity());
  for (int j = 0; j <= 240; ++j) {
    const double r = R * std::pow(2.0, j / 8.0);
    for (const Point& d : dirs) sup = std::max(sup, std::abs(k.value_at(r * d)));
  }
  return sup;
}

}  // namespace

HypothesisReport check_h_hypotheses(const CoefficientProfile& h, double A, int N) {
  HypothesisReport report;
  const double h0 = h.value_at_zero();
  report.entries.push_back({"h0", A + h0 > 0.0, json{{"A_plus_h0", A + h0}}});

  double max_abs = 0.0;
  bool finite = true;
  json bad = nullptr;
  for (const Point& x : probes_with_centers(h, 2000)) {
    const double v = h.value_at(x);
    if (!std::isfinite(v) || std::abs(v) > h.sup_norm() + 1e-12) {
      finite = false;
      if (bad.is_null()) bad = json{{"point", point_json(x)}, {"value", v}};
    } else {
      max_abs = std::max(max_abs, std::abs(v));
    }
  }
  json w1{{"probes", 2001 + static_cast<int>(h.atoms().size())}, {"max_abs", max_abs}};
  if (!bad.is_null()) w1["counterexample"] = bad;
  report.entries.push_back({"h1", finite, w1});

  const double c0 = hardy_constant(N) - A - h.sup_norm();
  report.entries.push_back({"h2", c0 > 0.0, json{{"c0", c0}, {"A_plus_norm", A + h.sup_norm()}}});
  return report;
}

HypothesisReport check_k_hypotheses(const CoefficientProfile& k, int N) {
  HypothesisReport report;
  const double k0 = k.value_at_zero();
  const double kinf = k.limit_at_infinity();
  const double top = k.sup_norm();
  report.entries.push_back(
      {"K0", top > std::max(k0, kinf), json{{"norm", top}, {"k_zero", k0}, {"k_infinity", kinf}}});

  const MaximaSet& C = k.maxima();
  const bool finite = !C.infinite && !C.points.empty();
  json w1{{"infinite", C.infinite}, {"count", C.points.size()}};
  json pts = json::array();
  for (const Point& p : C.points) pts.push_back(point_json(p));
  w1["points"] = pts;
  if (!C.sphere_radii.empty()) w1["sphere_radii"] = C.sphere_radii;
  report.entries.push_back({"K1", finite, w1});

  // Shell fit of log(k(a) - max_{|x-a|=r} k(x)) against log r, r = 2^{-p}, p = 4..12.
  std::vector<Point> peaks = C.points;
  if (peaks.empty())
    for (double r : C.sphere_radii) peaks.push_back(r * unit(N, 0));
  const double theta = k.flatness().value_or(2.0);
  bool k2 = !peaks.empty();
  json slopes = json::array();
  std::vector<Point> dirs;
  for (int i = 0; i < N; ++i) {
    dirs.push_back(unit(N, i));
    dirs.push_back(-unit(N, i));
  }
  for (const Point& a : peaks) {
    const double ka = k.value_at(a);
    std::vector<double> xs;
    std::vector<double> ys;
    bool exact = true;
    for (int p = 4; p <= 12; ++p) {
      const double r = std::ldexp(1.0, -p);
      double best = -std::numeric_limits<double>::infinity();
      for (const Point& d : dirs) best = std::max(best, k.value_at(a + r * d));
      const double gap = ka - best;
      if (gap > 0.0) {
        exact = false;
        xs.push_back(std::log(r));
        ys.push_back(std::log(gap));
      }
    }
    double slope = std::numeric_limits<double>::infinity();
    if (!exact && xs.size() >= 2) {
      const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
      const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
      double sxy = 0.0;
      double sxx = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
      }
      slope = sxy / sxx;
    } else if (!exact) {
      slope = 0.0;
    }
    const bool ok = slope > 2.0 && slope >= theta - 0.05;
    k2 = k2 && ok;
    slopes.push_back(json{{"peak", point_json(a)}, {"slope", std::isinf(slope) ? json("inf") : json(slope)}});
  }
  report.entries.push_back({"K2", k2, json{{"theta", theta}, {"fits", slopes}}});

  // R0 is the first of 1, 2, 4, ... with the maxima inside B_{R0 - 1} and a tail gap d0 > 0.
  const double norm = k.sup_norm();
  const double reach = C.infinite ? C.outermost_radius : [&] {
    double m = 0.0;
    for (const Point& p : C.points) m = std::max(m, p.norm());
    return m;
  }();
  bool k3 = false;
  json w3{{"norm", norm}};
  for (double R0 = 1.0; R0 <= 1048576.0 && !peaks.empty(); R0 *= 2.0) {
    if (!(reach < R0 - 1.0)) continue;
    const double tail = tail_sup(k, R0);
    const double d0 = norm - tail;
    if (d0 > 0.0) {
      k3 = true;
      w3["R0"] = R0;
      w3["d0"] = d0;
      w3["tail_sup"] = tail;
      break;
    }
  }
  report.entries.push_back({"K3", k3, w3});
  return report;
}

double condition_H_integral(const CoefficientProfile& h, double A, int N, double mu) {
  const double H = std::max(h.value_at_zero(), h.limit_at_infinity());
  const double coupling = A + H;
  if (!(coupling > 0.0) || !(coupling < hardy_constant(N))) {
    std::ostringstream os;
    os << "A + H = " << coupling << " outside (0, " << hardy_constant(N) << ")";
    throw Error(ErrorCode::coupling_out_of_range, os.str());
  }
  const Field w = Field::radial(ground_state(N, coupling, mu));
  return detail::integrate_coefficient(w, detail::Quantity::Hardy, h.shifted(-H), default_quadrature(N));
}

double condition_k_integral(const CoefficientProfile& k, double lambda, int N, double mu) {
  if (!(lambda > 0.0) || !(lambda < hardy_constant(N))) {
    std::ostringstream os;
    os << "lambda = " << lambda << " outside (0, " << hardy_constant(N) << ")";
    throw Error(ErrorCode::coupling_out_of_range, os.str());
  }
  if (!k.radial()) throw Error(ErrorCode::not_radial, "condition on k needs a radial coefficient");
  const double top = std::max(k.value_at_zero(), k.limit_at_infinity());
  const Field w = Field::radial(ground_state(N, lambda, mu));
  return detail::integrate_coefficient(w, detail::Quantity::Critical, k.shifted(-top), default_quadrature(N));
}

}  // namespace critvar
