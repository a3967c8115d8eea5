#include "critvar/thresholds.hpp"

#include <limits>
#include <map>
#include <mutex>
#include <sstream>

namespace critvar {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_lambda(int N, double lambda) {
  if (!(lambda > 0.0) || !(lambda < hardy_constant(N))) {
    std::ostringstream os;
    os << "lambda = " << lambda << " outside (0, " << hardy_constant(N) << ")";
    throw Error(ErrorCode::coupling_out_of_range, os.str());
  }
}

// c^{-(N-2)/2}, +infinity for c <= 0
double inverse_power(int N, double c) { return c > 0.0 ? std::pow(c, -(N - 2.0) / 2.0) : kInf; }

double prefactor(int N) { return std::pow(best_sobolev(N), 0.5 * N) / N; }

double decay_factor(int N, double lambda) { return std::pow(1.0 - lambda / hardy_constant(N), 0.5 * (N - 1)); }

Threshold minimum(int N, std::initializer_list<std::pair<const char*, double>> branches) {
  Threshold t{kInf, "none"};
  for (const auto& [name, value] : branches)
    if (value < t.value) t = {value, name};
  if (std::isfinite(t.value)) t.value *= prefactor(N);
  return t;
}

Threshold k_threshold(int N, double lambda, double norm, double k0, double kinf) {
  require_lambda(N, lambda);
  const double s = decay_factor(N, lambda);
  return minimum(N, {{"norm", inverse_power(N, norm)},
                     {"zero", inverse_power(N, k0) * s},
                     {"infinity", inverse_power(N, kinf) * s}});
}

}  // namespace

double lambda_N(int N) {
  require_dimension(N);
  return hardy_constant(N);
}

double best_sobolev(int N) {
  require_dimension(N);
  static std::mutex mutex;
  static std::map<int, double> cache;
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(N);
    if (it != cache.end()) return it->second;
  }
  const RadialProfile u = talenti(N, 1.0);
  const RadialGrid grid = RadialGrid::lattice(N, 0.0, 0.01, -6000, 6000);
  const double S = integrate_log(grid, [&](double s) {
    const double d = u.scaled_derivative(s);
    return d * d;
  });
  std::lock_guard<std::mutex> lock(mutex);
  cache.emplace(N, S);
  return S;
}

nlohmann::ordered_json Threshold::to_json() const {
  nlohmann::ordered_json j;
  j["value"] = std::isfinite(value) ? nlohmann::ordered_json(value) : nlohmann::ordered_json("inf");
  j["branch"] = branch;
  return j;
}

Threshold cstar(int N, double A, const CoefficientProfile& h) {
  require_dimension(N);
  const double Lambda = hardy_constant(N);
  const double c0 = A + h.value_at_zero();
  const double cinf = A + h.limit_at_infinity();
  if (!(c0 < Lambda) || !(cinf < Lambda)) {
    std::ostringstream os;
    os << "A + h(0) = " << c0 << " and A + h(inf) = " << cinf << " must be below " << Lambda;
    throw Error(ErrorCode::coupling_out_of_range, os.str());
  }
  const double e = 0.5 * (N - 1);
  return minimum(N, {{"zero", std::pow(1.0 - c0 / Lambda, e)}, {"infinity", std::pow(1.0 - cinf / Lambda, e)}});
}

Threshold tilde_c(int N, double lambda, const CoefficientProfile& k) {
  return k_threshold(N, lambda, k.sup_norm(), k.value_at_zero(), k.limit_at_infinity());
}

Threshold tilde_c1(int N, double lambda, const CoefficientProfile& k) {
  require_lambda(N, lambda);
  if (!k.radial()) throw Error(ErrorCode::not_radial, "the radial threshold needs a radial k");
  const double s = decay_factor(N, lambda);
  return minimum(N, {{"zero", inverse_power(N, k.value_at_zero()) * s},
                     {"infinity", inverse_power(N, k.limit_at_infinity()) * s}});
}

Threshold hat_c(int N, double lambda, const CoefficientProfile& k) {
  auto plus = [](double x) { return std::max(x, 0.0); };
  return k_threshold(N, lambda, plus(k.max_value()), plus(k.value_at_zero()), plus(k.limit_at_infinity()));
}

double b_lambda(int N, double lambda, const CoefficientProfile& k) {
  const double k0 = k.value_at_zero();
  const double kinf = k.limit_at_infinity();
  if (k0 == 0.0 && kinf == 0.0) return kInf;
  const double s = decay_factor(N, lambda);
  return std::min(inverse_power(N, k0), inverse_power(N, kinf)) * s;
}

double eps0_cap(int N) { return hardy_constant(N) * (1.0 - std::pow(2.0, -2.0 / (N - 1.0))); }

bool positivity_gate(int N, double lambda) { return 2.0 * decay_factor(N, lambda) > 1.0; }

double eps0(int N, const CoefficientProfile& k) {
  require_dimension(N);
  const double norm = k.sup_norm();
  const double k0 = k.value_at_zero();
  const double kinf = k.limit_at_infinity();
  if (!(norm > std::max(k0, kinf))) {
    std::ostringstream os;
    os << "(K0) fails: ||k|| = " << norm << ", k(0) = " << k0 << ", k(inf) = " << kinf;
    throw Error(ErrorCode::hypothesis_violated, os.str());
  }
  const double target = inverse_power(N, norm);
  auto holds = [&](double lambda) { return target <= b_lambda(N, lambda, k); };
  // The positivity gate is strict at the cap itself.
  const double cap = eps0_cap(N) * (1.0 - 1e-9);
  if (holds(cap)) return cap;
  double lo = 0.0;
  double hi = cap;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * cap; ++it) {
    const double mid = 0.5 * (lo + hi);
    (holds(mid) ? lo : hi) = mid;
  }
  return lo;
}

nlohmann::ordered_json ThresholdReport::to_json() const {
  nlohmann::ordered_json j;
  j["N"] = N;
  j["Lambda_N"] = Lambda;
  j["S"] = S;
  if (cstar) j["cstar"] = cstar->to_json();
  if (tilde_c) j["tilde_c"] = tilde_c->to_json();
  if (tilde_c1) j["tilde_c1"] = tilde_c1->to_json();
  if (hat_c) j["hat_c"] = hat_c->to_json();
  if (b) j["b"] = std::isfinite(*b) ? nlohmann::ordered_json(*b) : nlohmann::ordered_json("inf");
  if (eps0) j["eps0"] = *eps0;
  return j;
}

ThresholdReport threshold_report(const ProblemSpec& spec) {
  ThresholdReport r;
  r.N = spec.N;
  r.Lambda = lambda_N(spec.N);
  r.S = best_sobolev(spec.N);
  const double Lambda = r.Lambda;
  const double c = spec.coupling;
  if (c + spec.h.value_at_zero() < Lambda && c + spec.h.limit_at_infinity() < Lambda)
    r.cstar = cstar(spec.N, c, spec.h);
  if (c > 0.0 && c < Lambda) {
    r.tilde_c = tilde_c(spec.N, c, spec.k);
    if (spec.k.radial()) r.tilde_c1 = tilde_c1(spec.N, c, spec.k);
    r.hat_c = hat_c(spec.N, c, spec.k);
    r.b = b_lambda(spec.N, c, spec.k);
  }
  if (spec.k.sup_norm() > std::max(spec.k.value_at_zero(), spec.k.limit_at_infinity()))
    r.eps0 = eps0(spec.N, spec.k);
  return r;
}

}  // namespace critvar
