#include "critvar/obstructions.hpp"

#include <future>
#include <sstream>

#include "critvar/discrete.hpp"
#include "integrals.hpp"

namespace critvar {

using detail::Quantity;

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::PohozaevObstruction: return "PohozaevObstruction";
    case Verdict::NegativeI1: return "NegativeI1";
    case Verdict::CouplingTooLarge: return "CouplingTooLarge";
    case Verdict::NoObstructionFound: return "NoObstructionFound";
  }
  return "unknown";
}

nlohmann::ordered_json ObstructionVerdict::to_json() const {
  nlohmann::ordered_json j;
  j["verdict"] = to_string(verdict);
  j["witness_value"] = std::isfinite(witness_value) ? nlohmann::ordered_json(witness_value) : nullptr;
  j["details"] = details;
  if (witness_field) j["witness_field"] = witness_field->to_json();
  return j;
}

double pohozaev_integral(const CoefficientProfile& h, const Field& u, int N) {
  return pohozaev_integral(h, u, default_quadrature(N));
}

double pohozaev_integral(const CoefficientProfile& h, const Field& u, const QuadratureSettings& set) {
  if (!h.differentiable())
    throw Error(ErrorCode::nondifferentiable_preset, "preset '" + h.tag() + "' has no gradient");
  double total = 0.0;
  for (const Atom& atom : h.atoms()) {
    detail::Weight w;
    w.center = atom.center;
    const double c = atom.center.norm();
    if (c == 0.0) {
      // <grad a(|x|), x> = a'(r) r
      w.f = [atom](double r, double) { return atom.derivative(r) * r; };
    } else {
      // <x - c, x> = r^2 + z |c| with z the coordinate of x - c along c
      w.uses_axial = true;
      w.axis = atom.center / c;
      w.f = [atom, c](double r, double z) { return r == 0.0 ? 0.0 : atom.derivative(r) * (r * r + z * c) / r; };
    }
    total += detail::integrate_field(u, Quantity::Hardy, &w, set);
  }
  return total;
}

namespace {

struct SeedValue {
  double value = std::numeric_limits<double>::infinity();
  Field field;
  std::string name;
};

// Q(u) / ||u||_{2*}^2 and the normalized field.
SeedValue evaluate_seed(const ProblemSpec& spec, const Field& u, std::string name) {
  const double D = dirichlet_integral(u, spec.quadrature);
  double H = spec.coupling * hardy_integral(u, spec.quadrature);
  H += detail::integrate_coefficient(u, Quantity::Hardy, spec.h, spec.quadrature);
  const double C = critical_integral(u, spec.quadrature);
  const double p = critical_exponent(spec.N);
  SeedValue out;
  out.value = (D - H) / std::pow(C, 2.0 / p);
  out.field = u.times(std::pow(C, -1.0 / p));
  out.name = std::move(name);
  return out;
}

// Preconditioned descent of Q(v)/||v||_{2*}^2 on the solver lattice.
std::optional<SeedValue> descend(const ProblemSpec& spec, const SeedValue& start) {
  const int N = spec.N;
  const RadialProfile& phi = start.field.terms().front().profile;
  const auto [lo, hi] = phi.log_support(1e-12);
  const double limit = 600.0 / N;
  if (lo < -limit || hi > limit) return std::nullopt;
  ProblemSpec unit_k = spec;
  unit_k.k = constant_coefficient(N, 1.0);
  const RadialGrid grid = spec.quadrature.lattice.covering(lo, hi).clipped(lo, hi);
  const RadialDiscretization disc(unit_k, grid);
  const double p = critical_exponent(N);

  auto quotient = [&](const Eigen::VectorXd& v) {
    const auto pt = disc.parts(v);
    return (pt.dirichlet - pt.hardy) / std::pow(pt.nonlinear, 2.0 / p);
  };
  auto normalize = [&](Eigen::VectorXd v) {
    return Eigen::VectorXd(v / std::pow(disc.parts(v).nonlinear, 1.0 / p));
  };

  Eigen::VectorXd v = normalize(disc.sample(start.field));
  double R = quotient(v);
  double step = 1.0;
  for (int it = 0; it < 50; ++it) {
    // on ||v||_{2*} = 1: grad R = 2 (grad Q / 2 - R grad C / 2*)
    const Eigen::VectorXd grad = 2.0 * (disc.quadratic_gradient(v) - R * disc.critical_gradient(v));
    const Eigen::VectorXd g = disc.riesz(grad);
    const double slope = grad.dot(g);
    if (!(slope > 0.0)) break;
    double a = std::min(2.0 * step, 1.0);
    bool accepted = false;
    while (a > 1e-12) {
      const Eigen::VectorXd w = normalize(v - a * g);
      const double Rw = quotient(w);
      if (Rw <= R - 1e-4 * a * slope) {
        v = w;
        R = Rw;
        step = a;
        accepted = true;
        break;
      }
      a *= 0.5;
    }
    if (!accepted) break;
  }
  if (!(R < start.value)) return std::nullopt;
  SeedValue out;
  out.value = R;
  out.field = disc.to_field(v);
  out.name = start.name + "+descent";
  return out;
}

}  // namespace

I1Estimate estimate_I1(const ProblemSpec& spec) {
  const int N = spec.N;
  const double Lambda = hardy_constant(N);
  std::vector<std::pair<std::string, Field>> seeds;
  for (double frac : {0.9, 0.99, 0.999})
    for (double mu : {1e-2, 1.0, 1e2}) {
      std::ostringstream name;
      name << "ground_state(A=" << frac << "*Lambda, mu=" << mu << ")";
      seeds.emplace_back(name.str(), Field::radial(ground_state(N, frac * Lambda, mu)));
    }
  for (double r : {1e-2, 1.0, 1e2}) {
    std::ostringstream name;
    name << "talenti(r=" << r << ")";
    seeds.emplace_back(name.str(), Field::radial(talenti(N, r)));
  }

  std::vector<std::future<SeedValue>> jobs;
  for (const auto& [name, u] : seeds)
    jobs.push_back(std::async(std::launch::async, [&spec, &u, &name] {
      SeedValue s = evaluate_seed(spec, u, name);
      if (spec.radial())
        if (auto d = descend(spec, s)) return *d;
      return s;
    }));
  SeedValue best;
  for (auto& job : jobs) {
    SeedValue s = job.get();
    if (s.value < best.value) best = std::move(s);
  }
  I1Estimate out;
  out.upper_bound = best.value;
  out.negative = best.value < 0.0;
  out.witness = best.field;
  out.seed = best.name;
  return out;
}

ObstructionVerdict nonexistence_audit(const ProblemSpec& spec, const AuditOptions& opts) {
  const int N = spec.N;
  const double A = spec.coupling;
  const double Lambda = hardy_constant(N);
  ObstructionVerdict out;

  if (A > Lambda && spec.h.min_value() >= 0.0) {
    out.verdict = Verdict::CouplingTooLarge;
    out.witness_value = A - Lambda;
    out.details = {{"condition", "A > Lambda_N and h >= 0"}, {"A", A}, {"Lambda_N", Lambda},
                   {"h_min", spec.h.min_value()}};
    return out;
  }
  if (A > Lambda && spec.h.sup_norm() <= A / Lambda) {
    out.verdict = Verdict::CouplingTooLarge;
    out.witness_value = A - Lambda;
    out.details = {{"condition", "A > Lambda_N and ||h|| <= 4A/(N-2)^2"}, {"A", A}, {"Lambda_N", Lambda},
                   {"h_norm", spec.h.sup_norm()}};
    return out;
  }

  if (spec.h.differentiable() && !spec.h.is_constant()) {
    int positive = 0;
    int negative = 0;
    for (const Point& x : probe_points(N, opts.probes, opts.seed)) {
      const double d = spec.h.pohozaev_density(x);
      positive += d > 0.0;
      negative += d < 0.0;
    }
    if ((positive > 0) != (negative > 0)) {
      out.verdict = Verdict::PohozaevObstruction;
      out.witness_value = pohozaev_integral(spec.h, Field::radial(talenti(N, 1.0)), spec.quadrature);
      out.details = {{"probes", opts.probes}, {"positive", positive}, {"negative", negative},
                     {"witness_field", "talenti(r=1) at the origin"}};
      return out;
    }
    out.details["pohozaev_probe"] = {{"positive", positive}, {"negative", negative}};
  }

  bool ball_ok = true;
  for (const Point& x : probe_points(N, 1000, opts.seed)) {
    // radii log-uniform in [1e-12 delta, delta]
    if (A + spec.h.value_at(x * (opts.delta / 1e6)) < 0.0) {
      ball_ok = false;
      break;
    }
  }
  out.details["ball_delta"] = opts.delta;
  out.details["ball_nonnegative"] = ball_ok;
  if (ball_ok) {
    I1Estimate I1 = estimate_I1(spec);
    out.details["I1_upper_bound"] = I1.upper_bound;
    out.details["I1_seed"] = I1.seed;
    if (I1.negative) {
      out.verdict = Verdict::NegativeI1;
      out.witness_value = I1.upper_bound;
      out.witness_field = I1.witness;
      return out;
    }
  }
  out.verdict = Verdict::NoObstructionFound;
  return out;
}

}  // namespace critvar
