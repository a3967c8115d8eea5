#include "critvar/localization.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "critvar/thresholds.hpp"
#include "integrals.hpp"

namespace critvar {

using detail::Quantity;
using detail::Weight;

namespace {

constexpr double kPi = 3.14159265358979323846;

nlohmann::ordered_json finite_or_null(double x) {
  return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(nullptr);
}

nlohmann::ordered_json point_json(const Point& x) { return std::vector<double>(x.data(), x.data() + x.size()); }

double total_dirichlet(const Field& u, const QuadratureSettings& set) {
  const double D = u.empty() ? 0.0 : dirichlet_integral(u, set);
  if (!(D > 1e-300)) throw Error(ErrorCode::zero_field, "the field has no Dirichlet energy");
  return D;
}

Weight ball_weight(const Point& center, double radius, bool inside) {
  Weight w;
  w.center = center;
  w.f = [](double, double) { return 1.0; };
  w.cut_radius = radius;
  w.cut_inside = inside;
  return w;
}

std::optional<double> tail_slope(const std::vector<double>& radii, const std::vector<double>& tail) {
  int last = -1;
  int prev = -1;
  for (int i = static_cast<int>(radii.size()) - 1; i >= 0; --i) {
    if (!(tail[i] > 0.0)) continue;
    if (last < 0) {
      last = i;
    } else if (radii[i] < radii[last]) {
      prev = i;
      break;
    }
  }
  if (prev < 0) return std::nullopt;
  return std::log(tail[last] / tail[prev]) / std::log(radii[last] / radii[prev]);
}

}  // namespace

nlohmann::ordered_json PeakFrame::to_json() const {
  nlohmann::ordered_json j;
  j["N"] = N;
  auto& m = j["maxima"] = nlohmann::ordered_json::array();
  for (const Point& a : maxima) m.push_back(point_json(a));
  j["r0"] = r0;
  j["delta"] = delta;
  j["R0"] = R0;
  return j;
}

PeakFrame make_peak_frame(int N, std::vector<Point> maxima, std::optional<double> R0) {
  if (maxima.empty()) throw Error(ErrorCode::invalid_params, "a peak frame needs at least one maximum");
  PeakFrame f;
  f.N = N;
  f.maxima = std::move(maxima);
  double reach = 0.0;
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.maxima.size(); ++i) {
    if (f.maxima[i].size() != N) throw Error(ErrorCode::invalid_params, "maximum has the wrong dimension");
    reach = std::max(reach, f.maxima[i].norm());
    for (std::size_t j = i + 1; j < f.maxima.size(); ++j) dmin = std::min(dmin, (f.maxima[i] - f.maxima[j]).norm());
  }
  if (!(dmin > 0.0)) throw Error(ErrorCode::invalid_params, "maxima must be distinct");
  f.r0 = std::min(1.0, 0.5 * dmin);
  f.delta = f.r0 / 3.0;
  if (R0) {
    if (!(reach < *R0 - 1.0)) {
      std::ostringstream os;
      os << "R0 = " << *R0 << " does not keep the maxima inside B_{R0-1}";
      throw Error(ErrorCode::invalid_params, os.str());
    }
    f.R0 = *R0;
  } else {
    f.R0 = 1.0;
    while (!(reach < f.R0 - 1.0)) f.R0 *= 2.0;
  }
  return f;
}

PeakFrame make_peak_frame(const CoefficientProfile& k) {
  const MaximaSet& m = k.maxima();
  if (m.infinite || m.points.empty())
    throw Error(ErrorCode::hypothesis_violated, "preset '" + k.tag() + "' does not have finitely many maxima");
  std::optional<double> R0;
  const HypothesisReport rep = check_k_hypotheses(k, k.dimension());
  if (rep.holds("K3")) R0 = rep.get("K3").witness.at("R0").get<double>();
  return make_peak_frame(k.dimension(), m.points, R0);
}

double t_j(const Field& u, const PeakFrame& frame, int j, const QuadratureSettings& set) {
  if (j < 0 || j >= static_cast<int>(frame.maxima.size())) {
    std::ostringstream os;
    os << "peak index " << j << " is outside [0, " << frame.maxima.size() << ")";
    throw Error(ErrorCode::invalid_params, os.str());
  }
  const double D = total_dirichlet(u, set);
  Weight near = ball_weight(frame.maxima[j], 1.0, true);
  near.f = [](double r, double) { return r; };
  const Weight far = ball_weight(frame.maxima[j], 1.0, false);
  const double num = detail::integrate_field(u, Quantity::Dirichlet, &near, set) +
                     detail::integrate_field(u, Quantity::Dirichlet, &far, set);
  return std::clamp(num / D, 0.0, 1.0);
}

std::vector<double> t_all(const Field& u, const PeakFrame& frame, const QuadratureSettings& set) {
  std::vector<double> t;
  for (int j = 0; j < static_cast<int>(frame.maxima.size()); ++j) t.push_back(t_j(u, frame, j, set));
  return t;
}

nlohmann::ordered_json BallInequality::to_json() const {
  return {{"T_j", t}, {"total", total}, {"outside", outside}, {"applies", applies}, {"holds", holds}};
}

BallInequality ball_inequality(const Field& u, const PeakFrame& frame, int j, const QuadratureSettings& set) {
  BallInequality out;
  out.t = t_j(u, frame, j, set);
  out.total = total_dirichlet(u, set);
  const Weight far = ball_weight(frame.maxima[j], frame.r0, false);
  out.outside = detail::integrate_field(u, Quantity::Dirichlet, &far, set);
  out.applies = out.t <= frame.delta;
  out.holds = out.total >= 3.0 * out.outside;
  return out;
}

nlohmann::ordered_json SeparationReport::to_json() const {
  return {{"localized", localized}, {"T", t_values}, {"unique", unique}, {"distinct", distinct}};
}

SeparationReport separation_check(const std::vector<Field>& fields, const PeakFrame& frame,
                                  const QuadratureSettings& set) {
  SeparationReport rep;
  std::vector<int> claimed;
  for (const Field& u : fields) {
    const std::vector<double> t = t_all(u, frame, set);
    std::vector<int> loc;
    for (int j = 0; j < static_cast<int>(t.size()); ++j)
      if (t[j] <= frame.delta) loc.push_back(j);
    if (loc.size() > 1) rep.unique = false;
    if (loc.size() != 1) {
      rep.distinct = false;
    } else {
      if (std::find(claimed.begin(), claimed.end(), loc.front()) != claimed.end()) rep.distinct = false;
      claimed.push_back(loc.front());
    }
    rep.localized.push_back(std::move(loc));
    rep.t_values.push_back(t);
  }
  return rep;
}

Point xi_map(const Field& u, const PeakFrame& frame, const QuadratureSettings& set) {
  const int N = frame.N;
  const double D = total_dirichlet(u, set);
  Point axis;
  for (const FieldTerm& term : u.terms())
    if (term.center.norm() > 0.0) {
      axis = term.center.normalized();
      break;
    }
  if (axis.size() == 0) return Point::Zero(N);  // every center at the origin: xi is odd
  for (const FieldTerm& term : u.terms()) {
    const Point rel = term.center - term.center.dot(axis) * axis;
    if (rel.norm() > 1e-10 * (1.0 + term.center.norm()))
      throw Error(ErrorCode::unsupported_geometry, "field centers must lie on one line through the origin");
  }
  const double R0 = frame.R0;
  Weight inside;
  inside.center = origin(N);
  inside.uses_axial = true;
  inside.axis = axis;
  inside.f = [](double, double z) { return z; };
  inside.cut_radius = R0;
  inside.cut_inside = true;
  Weight outside = inside;
  outside.f = [R0](double r, double z) { return r > 0.0 ? R0 * z / r : 0.0; };
  outside.cut_inside = false;
  const double along = detail::integrate_field(u, Quantity::Dirichlet, &inside, set) +
                       detail::integrate_field(u, Quantity::Dirichlet, &outside, set);
  return axis * (along / D);
}

nlohmann::ordered_json BallMasses::to_json() const {
  return {{"center", point_json(center)},
          {"radius", radius},
          {"dirichlet", dirichlet},
          {"critical", critical},
          {"hardy", finite_or_null(hardy)}};
}

BallMasses ball_masses(const Field& u, const Point& center, double radius, const QuadratureSettings& set) {
  if (!(radius > 0.0)) throw Error(ErrorCode::invalid_params, "ball radius must be positive");
  BallMasses b;
  b.center = center;
  b.radius = radius;
  const Weight w = ball_weight(center, radius, true);
  b.dirichlet = detail::integrate_field(u, Quantity::Dirichlet, &w, set);
  b.critical = detail::integrate_field(u, Quantity::Critical, &w, set);
  try {
    b.hardy = detail::integrate_field(u, Quantity::Hardy, &w, set);
  } catch (const Error& e) {
    // the Hardy weight adds the origin; off-axis balls have no reduction
    if (e.code() != ErrorCode::unsupported_geometry) throw;
    b.hardy = std::numeric_limits<double>::quiet_NaN();
  }
  return b;
}

nlohmann::ordered_json ConcentrationReport::to_json() const {
  nlohmann::ordered_json j;
  j["radii"] = radii;
  j["dirichlet_tail"] = dirichlet_tail;
  j["critical_tail"] = critical_tail;
  j["hardy_tail"] = hardy_tail;
  j["totals"] = {{"dirichlet", dirichlet}, {"critical", critical}, {"hardy", hardy}};
  auto opt = [](const std::optional<double>& x) { return x ? finite_or_null(*x) : nlohmann::ordered_json(nullptr); };
  j["tail_exponents"] = {{"dirichlet", opt(dirichlet_exponent)},
                         {"critical", opt(critical_exponent)},
                         {"hardy", opt(hardy_exponent)}};
  auto& ob = j["origin_balls"] = nlohmann::ordered_json::array();
  for (const auto& b : origin_balls) ob.push_back(b.to_json());
  auto& pb = j["peak_balls"] = nlohmann::ordered_json::array();
  for (const auto& b : peak_balls) pb.push_back(b.to_json());
  return j;
}

std::string ConcentrationReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "R,mu_R,nu_R,gamma_R\n";
  for (std::size_t i = 0; i < radii.size(); ++i)
    os << radii[i] << ',' << dirichlet_tail[i] << ',' << critical_tail[i] << ',' << hardy_tail[i] << '\n';
  return os.str();
}

ConcentrationReport tail_masses(const Field& u, const ProblemSpec& spec, const std::vector<double>& radii) {
  if (radii.empty()) throw Error(ErrorCode::invalid_params, "tail_masses needs at least one radius");
  for (double R : radii)
    if (!(R > 0.0)) throw Error(ErrorCode::invalid_params, "tail radii must be positive");
  const QuadratureSettings& set = spec.quadrature;
  ConcentrationReport rep;
  rep.radii = radii;
  rep.dirichlet = total_dirichlet(u, set);
  rep.critical = critical_integral(u, set);
  rep.hardy = hardy_integral(u, set);
  const Point o = origin(spec.N);
  for (double R : radii) {
    const Weight w = ball_weight(o, R, false);
    const double mu = detail::integrate_field(u, Quantity::Dirichlet, &w, set);
    const double nu = detail::integrate_field(u, Quantity::Critical, &w, set);
    const double ga = detail::integrate_field(u, Quantity::Hardy, &w, set);
    rep.dirichlet_tail.push_back(mu);
    rep.critical_tail.push_back(nu);
    rep.hardy_tail.push_back(ga);
    BallMasses b;
    b.center = o;
    b.radius = R;
    b.dirichlet = std::max(0.0, rep.dirichlet - mu);
    b.critical = std::max(0.0, rep.critical - nu);
    b.hardy = std::max(0.0, rep.hardy - ga);
    rep.origin_balls.push_back(b);
  }
  rep.dirichlet_exponent = tail_slope(radii, rep.dirichlet_tail);
  rep.critical_exponent = tail_slope(radii, rep.critical_tail);
  rep.hardy_exponent = tail_slope(radii, rep.hardy_tail);
  const MaximaSet& m = spec.k.maxima();
  if (!m.infinite && !m.points.empty()) {
    const PeakFrame frame = make_peak_frame(spec.N, m.points);
    for (const Point& a : frame.maxima) rep.peak_balls.push_back(ball_masses(u, a, frame.r0, set));
  }
  return rep;
}

nlohmann::ordered_json PeakConcentration::to_json() const {
  return {{"peak", peak},
          {"lambda", lambdas},
          {"fraction", fraction},
          {"dirichlet", dirichlet},
          {"critical", critical},
          {"fraction_increasing", fraction_increasing},
          {"final_fraction", final_fraction},
          {"dirichlet_error", dirichlet_error},
          {"critical_error", critical_error}};
}

nlohmann::ordered_json ConcentrationVerification::to_json() const {
  nlohmann::ordered_json j;
  j["dirichlet_limit"] = dirichlet_limit;
  j["critical_limit"] = critical_limit;
  auto& p = j["peaks"] = nlohmann::ordered_json::array();
  for (const auto& x : peaks) p.push_back(x.to_json());
  return j;
}

ConcentrationVerification concentration_verify(const std::vector<LocalizedSolution>& results,
                                               const PeakFrame& frame, const ProblemSpec& spec) {
  const int N = spec.N;
  const double S = best_sobolev(N);
  const double norm = spec.k.sup_norm();
  ConcentrationVerification out;
  out.dirichlet_limit = std::pow(S, 0.5 * N) * std::pow(norm, -0.5 * (N - 2.0));
  out.critical_limit = std::pow(S, 0.5 * N) * std::pow(norm, -0.5 * N);
  const QuadratureSettings& set = spec.quadrature;

  std::vector<int> peaks;
  for (const auto& r : results)
    if (std::find(peaks.begin(), peaks.end(), r.peak) == peaks.end()) peaks.push_back(r.peak);
  std::sort(peaks.begin(), peaks.end());

  for (int j : peaks) {
    std::vector<const LocalizedSolution*> rows;
    for (const auto& r : results)
      if (r.peak == j) rows.push_back(&r);
    std::stable_sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->lambda > b->lambda; });
    PeakConcentration pc;
    pc.peak = j;
    for (const auto* r : rows) {
      const double D = total_dirichlet(r->field, set);
      const BallMasses b = ball_masses(r->field, frame.maxima.at(j), frame.r0 / 10.0, set);
      pc.lambdas.push_back(r->lambda);
      pc.dirichlet.push_back(D);
      pc.critical.push_back(critical_integral(r->field, set));
      pc.fraction.push_back(b.dirichlet / D);
    }
    pc.fraction_increasing = true;
    for (std::size_t i = 1; i < pc.fraction.size(); ++i)
      if (!(pc.fraction[i] > pc.fraction[i - 1])) pc.fraction_increasing = false;
    if (!pc.fraction.empty()) {
      pc.final_fraction = pc.fraction.back();
      pc.dirichlet_error = std::abs(pc.dirichlet.back() - out.dirichlet_limit) / out.dirichlet_limit;
      pc.critical_error = std::abs(pc.critical.back() - out.critical_limit) / out.critical_limit;
    }
    out.peaks.push_back(std::move(pc));
  }
  return out;
}

int separated_maxima_count(const CoefficientProfile& k, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::invalid_params, "delta must be positive");
  if (k.tag() == "k1_example") {
    // Spheres r_n = 1/2 + 1/(n pi) accumulating at 1/2. Neighbouring shells
    // merge once the gap 1/(pi n (n+1)) is at most 2 delta, and the gaps
    // decrease, so everything from that n on joins the shell around 1/2.
    int count = 1;
    for (long n = 1;; ++n) {
      const double gap = 1.0 / (kPi * static_cast<double>(n) * static_cast<double>(n + 1));
      if (!(gap > 2.0 * delta)) break;
      ++count;
    }
    return count;
  }
  const MaximaSet& m = k.maxima();
  if (m.infinite)
    throw Error(ErrorCode::hypothesis_violated, "preset '" + k.tag() + "' has infinitely many maxima");
  const int n = static_cast<int>(m.points.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if ((m.points[i] - m.points[j]).norm() <= 2.0 * delta) parent[find(i)] = find(j);
  int count = 0;
  for (int i = 0; i < n; ++i) count += find(i) == i;
  return count;
}

}  // namespace critvar
