#include "critvar/solver.hpp"

#include <algorithm>
#include <future>
#include <sstream>

#include "critvar/discrete.hpp"

namespace critvar {

namespace {

nlohmann::ordered_json finite_or_null(double x) {
  return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(nullptr);
}

// Log radius where rho^q |u| peaks, located on the spec's lattice.
double peak_log_radius(const ProblemSpec& spec, const Field& u) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const FieldTerm& term : u.terms()) {
    const auto [a, b] = term.profile.log_support(1e-12);
    lo = std::min(lo, a);
    hi = std::max(hi, b);
  }
  const double limit = 600.0 / spec.N;
  lo = std::max(lo, -limit);
  hi = std::min(hi, limit);
  const RadialGrid grid = spec.quadrature.lattice.covering(lo, hi).clipped(lo, hi);
  double best = -1.0;
  double s_best = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    const double s = grid.log_node(i);
    double v = 0.0;
    for (const FieldTerm& term : u.terms()) v += term.amplitude * term.profile.scaled_value(s);
    if (std::abs(v) > best) {
      best = std::abs(v);
      s_best = s;
    }
  }
  return s_best;
}

// Threshold a radial solve is compared with: c* for k = 1, the radial
// tilde c for h = 0, none otherwise.
std::optional<Threshold> radial_threshold(const ProblemSpec& spec) {
  const bool k_one = spec.k.is_constant() && spec.k.constant() == 1.0;
  const bool h_zero = spec.h.is_constant() && spec.h.constant() == 0.0;
  if (k_one) return cstar(spec.N, spec.coupling, spec.h);
  if (h_zero) return tilde_c1(spec.N, spec.coupling, spec.k);
  return std::nullopt;
}

double relative_riesz_residual(const RadialDiscretization& disc, const Eigen::VectorXd& v) {
  const double norm = disc.metric_norm2(v);
  if (!(norm > 0.0)) return 0.0;
  const Eigen::VectorXd g = disc.riesz(disc.gradient(v));
  return std::sqrt(std::max(0.0, disc.metric_norm2(g)) / norm);
}

// Bubble ansatz about a_j in the variables x = (log mu, y / ell), center
// c = a_j + F y with F a reflection taking e_1 to the direction of a_j, so
// that symmetric peaks lead to identical problems.
class Ansatz {
 public:
  Ansatz(const ProblemSpec& spec, const PeakFrame& frame, int j, double ell)
      : spec_(spec), frame_(frame), j_(j), N_(spec.N), ell_(ell), a_(frame.maxima[j]) {
    F_ = Eigen::MatrixXd::Identity(N_, N_);
    const double r = a_.norm();
    if (r > 0.0) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(N_);
      v(0) = 1.0;
      v -= a_ / r;
      if (v.norm() > 1e-14) F_ -= 2.0 * v * v.transpose() / v.squaredNorm();
    }
  }

  int size() const { return N_ + 1; }
  double ell() const { return ell_; }
  double mu(const Eigen::VectorXd& x) const { return std::exp(x(0)); }
  Point center(const Eigen::VectorXd& x) const { return a_ + F_ * (ell_ * x.tail(N_)); }
  double offset(const Eigen::VectorXd& x) const { return ell_ * x.tail(N_).norm(); }
  Field bubble(const Eigen::VectorXd& x) const { return talenti_bubble(N_, mu(x), center(x)); }

  EnergyBreakdown parts(const Eigen::VectorXd& x) const { return energy(spec_, bubble(x)); }

  // max_t J(t u); +inf where the ray has no Nehari point.
  double level(const Eigen::VectorXd& x) const {
    const EnergyBreakdown e = parts(x);
    if (!(e.quadratic_form() > 0.0) || !(e.nonlinear > 0.0)) return std::numeric_limits<double>::infinity();
    return mountain_pass_level(N_, e);
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
    constexpr double step = 1e-4;
    Eigen::VectorXd g(size());
    for (int i = 0; i < size(); ++i) {
      Eigen::VectorXd xp = x;
      Eigen::VectorXd xm = x;
      xp(i) += step;
      xm(i) -= step;
      g(i) = (level(xp) - level(xm)) / (2.0 * step);
    }
    return g;
  }

  // |(dE/dlog mu, mu dE/dc)| / E.
  double residual(const Eigen::VectorXd& x, const Eigen::VectorXd& g, double E) const {
    const double m = mu(x) / ell_;
    return std::sqrt(g(0) * g(0) + m * m * g.tail(N_).squaredNorm()) / std::abs(E);
  }

  double t_j(const Eigen::VectorXd& x) const { return critvar::t_j(bubble(x), frame_, j_, spec_.quadrature); }

 private:
  const ProblemSpec& spec_;
  const PeakFrame& frame_;
  int j_;
  int N_;
  double ell_;
  Point a_;
  Eigen::MatrixXd F_;
};

SolveResult localized_solve(const ProblemSpec& input, const PeakFrame& frame, int j, const SolverOptions& opts) {
  const int N = input.N;
  ProblemSpec spec = input;
  spec.quadrature = quadrature_with_step(N, opts.localized_log_step, opts.localized_angular_order);
  const double delta = opts.trust_delta.value_or(frame.delta);
  const double r0 = frame.r0;

  // local flat-top width: radius of the atom sitting on a_j
  double width = 1.0;
  for (const Atom& atom : spec.k.atoms())
    if ((atom.center - frame.maxima[j]).norm() <= 1e-12 * (1.0 + atom.center.norm())) width = atom.radius;
  const double ell = std::min(width, r0);
  const Ansatz ansatz(spec, frame, j, ell);

  auto inside = [&](const Eigen::VectorXd& x) { return ansatz.offset(x) < r0 && ansatz.t_j(x) < delta; };
  auto at_boundary = [&](const Eigen::VectorXd& x) {
    return ansatz.offset(x) >= (1.0 - 1e-3) * r0 || ansatz.t_j(x) >= (1.0 - 1e-3) * delta;
  };

  Eigen::VectorXd x = Eigen::VectorXd::Zero(ansatz.size());
  x(0) = std::log(0.1 * width);
  double E = ansatz.level(x);
  if (!std::isfinite(E) || !inside(x)) {
    std::ostringstream os;
    os << "initial bubble at peak " << j << " (mu = " << 0.1 * width << ") is not inside the trust region";
    throw Error(ErrorCode::infeasible_init, os.str());
  }
  Eigen::VectorXd g = ansatz.gradient(x);
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(ansatz.size(), ansatz.size());
  bool scaled = false;

  SolveResult out;
  out.peak = j;
  auto record = [&](int it, double res) {
    if (!opts.record_trace) return;
    TraceRow row;
    row.iteration = it;
    row.J = E;
    row.residual = res;
    const EnergyBreakdown e = ansatz.parts(x);
    row.t = std::pow(e.quadratic_form() / e.nonlinear, 1.0 / (critical_exponent(N) - 2.0));
    row.mu = ansatz.mu(x);
    row.offset = ansatz.offset(x);
    row.T = t_all(ansatz.bubble(x), frame, spec.quadrature);
    out.trace.push_back(std::move(row));
  };

  double res = ansatz.residual(x, g, E);
  out.status = "max-iterations-exceeded";
  int it = 0;
  for (;; ++it) {
    record(it, res);
    if (res <= opts.tolerance) {
      out.status = "converged";
      break;
    }
    if (it >= opts.max_iterations) break;
    Eigen::VectorXd d = -H * g;
    if (!(g.dot(d) < 0.0)) {
      H.setIdentity();
      scaled = false;
      d = -g;
    }
    if (d.norm() > 1.0) d /= d.norm();
    const double slope = g.dot(d);
    double a = opts.initial_step;
    bool accepted = false;
    Eigen::VectorXd xt;
    double Et = E;
    while (a > 1e-10) {
      xt = x + a * d;
      Et = ansatz.level(xt);
      if (Et <= E + opts.armijo * a * slope && inside(xt)) {
        accepted = true;
        break;
      }
      a *= opts.backstep;
    }
    if (!accepted) {
      out.status = "line-search-stalled";
      break;
    }
    const Eigen::VectorXd gt = ansatz.gradient(xt);
    const Eigen::VectorXd s = xt - x;
    const Eigen::VectorXd y = gt - g;
    const double sy = s.dot(y);
    if (sy > 1e-16) {
      if (!scaled) {
        H *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(ansatz.size(), ansatz.size());
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    x = xt;
    E = Et;
    g = gt;
    res = ansatz.residual(x, g, E);
  }
  if (out.status != "converged" && at_boundary(x)) out.status = "trust-region-violation";

  const Field u = ansatz.bubble(x);
  const EnergyBreakdown e = energy(spec, u);
  const double p = critical_exponent(N);
  const double t = std::pow(e.quadratic_form() / e.nonlinear, 1.0 / (p - 2.0));
  out.field = u.times(t);
  out.energy = EnergyBreakdown::from_parts(N, t * t * e.dirichlet, t * t * e.hardy, std::pow(t, p) * e.nonlinear);
  out.residual = res;
  out.iterations = it;
  out.converged = out.status == "converged";
  out.scale = ansatz.mu(x);
  out.center = ansatz.center(x);
  out.localization = t_all(u, frame, spec.quadrature);
  out.threshold = tilde_c(N, spec.coupling, spec.k);
  out.below_threshold = out.converged && out.energy.J < out.threshold->value;
  return out;
}

void require_k_hypotheses(const ProblemSpec& spec) {
  const HypothesisReport rep = check_k_hypotheses(spec.k, spec.N);
  for (const char* name : {"K0", "K1", "K2"})
    if (!rep.holds(name))
      throw Error(ErrorCode::hypothesis_violated,
                  std::string("(") + name + ") fails for preset '" + spec.k.tag() + "'");
}

}  // namespace

void SolverOptions::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::invalid_params, "solver option " + what); };
  if (max_iterations < 0) bad("max_iterations must be nonnegative");
  if (!(tolerance > 0.0)) bad("tolerance must be positive");
  if (!(initial_step > 0.0)) bad("initial_step must be positive");
  if (!(backstep > 0.0 && backstep < 1.0)) bad("backstep must lie in (0, 1)");
  if (!(armijo > 0.0 && armijo < 1.0)) bad("armijo must lie in (0, 1)");
  if (trust_delta && !(*trust_delta > 0.0)) bad("trust_delta must be positive");
  if (!(localized_log_step > 0.0)) bad("localized_log_step must be positive");
  if (localized_angular_order < 8) bad("localized_angular_order must be at least 8");
  if (workers < 1) bad("workers must be at least 1");
}

nlohmann::ordered_json SolverOptions::to_json() const {
  nlohmann::ordered_json j;
  j["max_iterations"] = max_iterations;
  j["tolerance"] = tolerance;
  j["initial_step"] = initial_step;
  j["backstep"] = backstep;
  j["armijo"] = armijo;
  j["positivity"] = positivity;
  j["trust_delta"] = trust_delta ? nlohmann::ordered_json(*trust_delta) : nlohmann::ordered_json(nullptr);
  j["localized_log_step"] = localized_log_step;
  j["localized_angular_order"] = localized_angular_order;
  j["workers"] = workers;
  return j;
}

nlohmann::ordered_json SolveResult::to_json() const {
  nlohmann::ordered_json j;
  j["status"] = status;
  j["converged"] = converged;
  j["iterations"] = iterations;
  j["residual"] = finite_or_null(residual);
  j["energy"] = energy.to_json();
  j["threshold"] = threshold ? threshold->to_json() : nlohmann::ordered_json(nullptr);
  j["below_threshold"] = below_threshold;
  if (peak >= 0) {
    j["peak"] = peak;
    j["scale"] = scale;
    j["center"] = std::vector<double>(center.data(), center.data() + center.size());
  }
  j["localization"] = localization;
  return j;
}

std::string SolveResult::trace_csv() const {
  std::size_t m = localization.size();
  for (const auto& row : trace) m = std::max(m, row.T.size());
  std::ostringstream os;
  os.precision(17);
  os << "iteration,J,residual,t,mu,offset";
  for (std::size_t i = 0; i < m; ++i) os << ",T_" << i + 1;
  os << '\n';
  for (const auto& row : trace) {
    os << row.iteration << ',' << row.J << ',' << row.residual << ',' << row.t << ',';
    if (row.mu) os << *row.mu;
    os << ',';
    if (row.offset) os << *row.offset;
    for (std::size_t i = 0; i < m; ++i) {
      os << ',';
      if (i < row.T.size()) os << row.T[i];
    }
    os << '\n';
  }
  return os.str();
}

SolveResult solve_radial(const ProblemSpec& spec, const Field& init, const SolverOptions& opts) {
  opts.validate();
  if (!spec.radial()) throw Error(ErrorCode::not_radial, "solve_radial needs radial h and k");
  if (init.empty()) throw Error(ErrorCode::infeasible_init, "the initial field is zero");
  if (!init.radial_about_origin()) throw Error(ErrorCode::not_radial, "the initial field has terms away from the origin");

  const RadialGrid grid = solver_grid(spec, peak_log_radius(spec, init));
  const RadialDiscretization disc(spec, grid);
  Eigen::VectorXd v = disc.sample(init);
  if (opts.positivity) v = v.cwiseAbs();
  double t = 1.0;
  try {
    t = disc.nehari_factor(v);
  } catch (const Error& e) {
    throw Error(ErrorCode::infeasible_init, std::string("initial field has no Nehari point: ") + e.what());
  }
  v *= t;
  double J = disc.J(v);

  SolveResult out;
  out.status = "max-iterations-exceeded";
  double step = opts.initial_step;
  int it = 0;
  for (;; ++it) {
    const Eigen::VectorXd grad = disc.gradient(v);
    const Eigen::VectorXd g = disc.riesz(grad);
    const double slope = grad.dot(g);
    const double res = std::sqrt(std::max(0.0, slope) / disc.metric_norm2(v));
    out.residual = res;
    if (opts.record_trace) out.trace.push_back({it, J, res, t, std::nullopt, std::nullopt, {}});
    if (res <= opts.tolerance) {
      out.status = "converged";
      break;
    }
    if (it >= opts.max_iterations) break;
    double a = std::min(2.0 * step, opts.initial_step);
    bool accepted = false;
    Eigen::VectorXd w;
    double Jw = J;
    double tw = 1.0;
    while (a > 1e-12) {
      w = v - a * g;
      if (opts.positivity) w = w.cwiseAbs();
      try {
        tw = disc.nehari_factor(w);
        w *= tw;
        Jw = disc.J(w);
        if (Jw <= J - opts.armijo * a * slope) {
          accepted = true;
          break;
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::nonpositive_numerator && e.code() != ErrorCode::nonpositive_denominator) throw;
      }
      a *= opts.backstep;
    }
    if (!accepted) {
      out.status = "line-search-stalled";
      break;
    }
    v = std::move(w);
    J = Jw;
    t = tw;
    step = a;
  }
  out.iterations = it;
  out.converged = out.status == "converged";
  out.field = disc.to_field(v);
  out.energy = disc.energy(v);
  out.threshold = radial_threshold(spec);
  out.below_threshold = out.threshold && out.energy.J < out.threshold->value;
  return out;
}

double residual(const ProblemSpec& spec, const Field& u) {
  if (u.empty()) return 0.0;
  RadialGrid grid;
  Eigen::VectorXd v;
  if (sampled_radial(u, &grid, &v)) return relative_riesz_residual(RadialDiscretization(spec, grid), v);
  if (u.radial_about_origin() && spec.radial()) {
    const RadialDiscretization disc(spec, solver_grid(spec, peak_log_radius(spec, u)));
    return relative_riesz_residual(disc, disc.sample(u));
  }
  const auto& terms = u.terms();
  if (terms.size() != 1 || terms.front().profile.family() != ProfileFamily::Talenti)
    throw Error(ErrorCode::unsupported_geometry, "residual of a non-radial field needs a single Talenti bubble");
  // reduced gradient of the ansatz in (log mu, c) plus the Nehari defect
  const int N = spec.N;
  const FieldTerm& term = terms.front();
  const double mu = term.profile.scale();
  auto level = [&](double lmu, const Point& c) {
    return mountain_pass_level(N, energy(spec, talenti_bubble(N, std::exp(lmu), c)));
  };
  const double lmu = std::log(mu);
  const double E = level(lmu, term.center);
  const double h = 1e-4;
  double g2 = std::pow((level(lmu + h, term.center) - level(lmu - h, term.center)) / (2.0 * h), 2);
  for (int i = 0; i < N; ++i) {
    Point dc = Point::Zero(N);
    dc(i) = h * mu;
    g2 += std::pow((level(lmu, term.center + dc) - level(lmu, term.center - dc)) / (2.0 * h), 2);
  }
  const EnergyBreakdown e = energy(spec, u);
  return std::sqrt(g2 / (E * E) + std::pow(e.nehari_residual / e.dirichlet, 2));
}

SolveResult solve_localized(const ProblemSpec& spec, int j, const SolverOptions& opts) {
  opts.validate();
  require_k_hypotheses(spec);
  const PeakFrame frame = make_peak_frame(spec.k);
  if (j < 0 || j >= static_cast<int>(frame.maxima.size())) {
    std::ostringstream os;
    os << "peak index " << j << " is outside [0, " << frame.maxima.size() << ")";
    throw Error(ErrorCode::hypothesis_violated, os.str());
  }
  SolveResult r = localized_solve(spec, frame, j, opts);
  if (r.status == "trust-region-violation") {
    std::ostringstream os;
    os << "localized minimizer at peak " << j << " reached the trust-region boundary (T_j = " << r.localization[j]
       << ", delta = " << opts.trust_delta.value_or(frame.delta) << ")";
    throw Error(ErrorCode::trust_region_violation, os.str());
  }
  return r;
}

nlohmann::ordered_json MultiplicityResult::to_json() const {
  nlohmann::ordered_json j;
  j["frame"] = frame.to_json();
  auto& r = j["results"] = nlohmann::ordered_json::array();
  for (const auto& x : results) r.push_back(x.to_json());
  j["separation"] = separation.to_json();
  j["gate"] = gate;
  return j;
}

MultiplicityResult multiplicity_run(const ProblemSpec& spec, const SolverOptions& opts) {
  opts.validate();
  require_k_hypotheses(spec);
  MultiplicityResult out;
  out.frame = make_peak_frame(spec.k);
  const int m = static_cast<int>(out.frame.maxima.size());

  std::vector<SolveResult> results(m);
  for (int start = 0; start < m; start += opts.workers) {
    std::vector<std::future<SolveResult>> jobs;
    for (int j = start; j < std::min(m, start + opts.workers); ++j)
      jobs.push_back(std::async(std::launch::async, [&, j] { return localized_solve(spec, out.frame, j, opts); }));
    for (int j = start; j < std::min(m, start + opts.workers); ++j) results[j] = jobs[j - start].get();
  }

  auto key = [](const SolveResult& r) {
    std::ostringstream os;
    os.precision(8);
    os << std::scientific << r.energy.J;
    return std::make_tuple(std::stod(os.str()), r.scale, r.peak);
  };
  std::stable_sort(results.begin(), results.end(),
                   [&](const SolveResult& a, const SolveResult& b) { return key(a) < key(b); });

  std::vector<Field> fields;
  for (const auto& r : results) fields.push_back(r.field);
  out.separation = separation_check(fields, out.frame,
                                    quadrature_with_step(spec.N, opts.localized_log_step, opts.localized_angular_order));
  out.gate = out.separation.distinct &&
             std::all_of(results.begin(), results.end(), [](const SolveResult& r) { return r.below_threshold; });
  out.results = std::move(results);
  return out;
}

}  // namespace critvar
