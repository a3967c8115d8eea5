#include "critvar/quadrature.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <tuple>

namespace critvar {

double sphere_measure(int N) { return 2.0 * std::pow(M_PI, 0.5 * N) / std::tgamma(0.5 * N); }

namespace detail {
void throw_non_finite(double where) {
  std::ostringstream os;
  os << "integrand is not finite at rho = " << where;
  throw Error(ErrorCode::non_finite_integrand, os.str());
}
}  // namespace detail

RadialGrid RadialGrid::lattice(int N, double s_anchor, double h, long k_lo, long k_hi) {
  RadialGrid g;
  g.N_ = N;
  g.anchor_ = s_anchor;
  g.h_ = h;
  g.k_lo_ = k_lo;
  const long M = k_hi - k_lo + 1;
  g.s_.resize(M);
  g.rho_.resize(M);
  g.w_.resize(M);
  for (long i = 0; i < M; ++i) {
    g.s_[i] = s_anchor + static_cast<double>(k_lo + i) * h;
    g.rho_[i] = std::exp(g.s_[i]);
  }
  for (long i = 0; i < M; ++i) g.w_[i] = g.log_weight(static_cast<int>(i)) * g.rho_[i];
  return g;
}

RadialGrid RadialGrid::covering(double s_lo, double s_hi) const {
  const long k_hi = k_lo_ + size() - 1;
  const long want_lo = static_cast<long>(std::floor((s_lo - anchor_) / h_));
  const long want_hi = static_cast<long>(std::ceil((s_hi - anchor_) / h_));
  return lattice(N_, anchor_, h_, std::min(k_lo_, want_lo), std::max(k_hi, want_hi));
}

RadialGrid RadialGrid::clipped(double s_lo, double s_hi) const {
  const long k_hi = k_lo_ + size() - 1;
  long lo = std::max(k_lo_, static_cast<long>(std::ceil((s_lo - anchor_) / h_)));
  long hi = std::min(k_hi, static_cast<long>(std::floor((s_hi - anchor_) / h_)));
  if (hi - lo < 1) {
    lo = std::min(lo, k_hi - 1);
    hi = lo + 1;
  }
  return lattice(N_, anchor_, h_, lo, hi);
}

RadialGrid RadialGrid::refined() const {
  const long k_hi = k_lo_ + size() - 1;
  return lattice(N_, anchor_, 0.5 * h_, 2 * k_lo_, 2 * k_hi);
}

RadialGrid RadialGrid::shifted(double ds) const {
  return lattice(N_, anchor_ + ds, h_, k_lo_, k_lo_ + size() - 1);
}

RadialGrid build_grid(int N, double r_min, double r_max, int M) {
  require_dimension(N);
  if (!(r_min > 0.0) || !(r_min < r_max) || !std::isfinite(r_max)) {
    std::ostringstream os;
    os << "need 0 < r_min < r_max, got [" << r_min << ", " << r_max << "]";
    throw Error(ErrorCode::invalid_range, os.str());
  }
  if (M < 16) throw Error(ErrorCode::invalid_params, "grid needs M >= 16 nodes");
  const double s0 = std::log(r_min);
  const double h = (std::log(r_max) - s0) / (M - 1);
  return RadialGrid::lattice(N, s0, h, 0, M - 1);
}

RadialGrid default_grid(int N) { return build_grid(N, 1e-8, 1e8, 2000); }

QuadratureSettings default_quadrature(int N) { return {default_grid(N), 64}; }

QuadratureSettings quadrature_with_step(int N, double log_step, int angular_order) {
  require_dimension(N);
  if (!(log_step > 0.0)) throw Error(ErrorCode::invalid_params, "log step must be positive");
  if (angular_order < 8) throw Error(ErrorCode::invalid_params, "angular_order must be at least 8");
  const double s0 = std::log(1e-8);
  const long k_hi = static_cast<long>(std::ceil((std::log(1e8) - s0) / log_step));
  return {RadialGrid::lattice(N, s0, log_step, 0, k_hi), angular_order};
}

namespace {

GaussRule golub_welsch(int n, double alpha, double beta) {
  const double ab = alpha + beta;
  Eigen::VectorXd diag(n);
  Eigen::VectorXd sub(std::max(n - 1, 1));
  for (int k = 0; k < n; ++k) {
    const double two_k = 2.0 * k + ab;
    if (k == 0)
      diag(k) = (beta - alpha) / (ab + 2.0);
    else
      diag(k) = (beta * beta - alpha * alpha) / (two_k * (two_k + 2.0));
  }
  for (int k = 1; k < n; ++k) {
    const double two_k = 2.0 * k + ab;
    const double num = 4.0 * k * (k + alpha) * (k + beta) * (k + ab);
    const double den = two_k * two_k * (two_k + 1.0) * (two_k - 1.0);
    sub(k - 1) = std::sqrt(num / den);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub.head(n - 1), Eigen::ComputeEigenvectors);
  const double mu0 = std::pow(2.0, ab + 1.0) * std::exp(std::lgamma(alpha + 1.0) + std::lgamma(beta + 1.0) -
                                                         std::lgamma(ab + 2.0));
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0;
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_jacobi(int n, double alpha, double beta) {
  if (n < 1) throw Error(ErrorCode::invalid_params, "Gauss rule needs at least one node");
  static std::mutex mutex;
  static std::map<std::tuple<int, double, double>, std::unique_ptr<GaussRule>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{n, alpha, beta}];
  if (!slot) slot = std::make_unique<GaussRule>(golub_welsch(n, alpha, beta));
  return *slot;
}

std::optional<AxialFrame> collinear_frame(const std::vector<Point>& points, const Point* preferred_axis) {
  if (points.empty()) throw Error(ErrorCode::invalid_params, "collinear_frame needs at least one point");
  const Eigen::Index n = points.front().size();
  AxialFrame frame;
  frame.base = points.front();
  double scale = 0.0;
  std::size_t far = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = (points[i] - frame.base).norm();
    if (d > scale) {
      scale = d;
      far = i;
    }
  }
  if (scale == 0.0) {
    if (preferred_axis && preferred_axis->norm() > 0.0) {
      frame.axis = preferred_axis->normalized();
    } else {
      frame.axis = Point::Zero(n);
      frame.axis(0) = 1.0;
    }
  } else {
    frame.axis = (points[far] - frame.base) / scale;
    if (preferred_axis && preferred_axis->norm() > 0.0 && frame.axis.dot(*preferred_axis) < 0.0)
      frame.axis = -frame.axis;
  }
  const double tol = 1e-10 * (1.0 + scale + frame.base.norm());
  frame.coords.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point rel = points[i] - frame.base;
    const double along = rel.dot(frame.axis);
    if ((rel - along * frame.axis).norm() > tol) return std::nullopt;
    frame.coords[i] = along;
  }
  return frame;
}

namespace detail {

AxialPlan plan_axial(const RadialGrid& grid, const std::vector<double>& z, int angular_order,
                     const std::optional<AxialCut>& cut) {
  if (z.empty()) throw Error(ErrorCode::invalid_params, "axial integral needs at least one center");
  if (angular_order < 1) throw Error(ErrorCode::invalid_params, "angular order must be positive");
  AxialPlan plan;
  plan.N = grid.dimension();
  plan.exponent = 2.0 * plan.N + 4.0;
  plan.omega_axis = 2.0 * std::pow(M_PI, 0.5 * (plan.N - 1)) / std::tgamma(0.5 * (plan.N - 1));
  plan.cut = cut;

  double scale = 1.0;
  for (double v : z) scale = std::max(scale, std::abs(v));
  if (cut) scale = std::max(scale, std::abs(cut->z));
  const double tol = 1e-13 * scale;
  auto find_or_add = [&](double v) {
    for (std::size_t m = 0; m < plan.centers.size(); ++m)
      if (std::abs(plan.centers[m] - v) <= tol) return static_cast<int>(m);
    plan.centers.push_back(v);
    return static_cast<int>(plan.centers.size() - 1);
  };
  for (double v : z) plan.user_to_center.push_back(find_or_add(v));
  int cut_center = -1;
  if (cut) {
    if (!(cut->radius > 0.0)) throw Error(ErrorCode::invalid_params, "cut radius must be positive");
    cut_center = find_or_add(cut->z);
  }

  const double alpha = 0.5 * (plan.N - 3);
  plan.jacobi = &gauss_jacobi(angular_order, alpha, alpha);
  plan.legendre = &gauss_jacobi(angular_order, 0.0, 0.0);

  plan.parts.resize(plan.centers.size());
  for (std::size_t k = 0; k < plan.centers.size(); ++k) {
    AxialPart& part = plan.parts[k];
    part.z = plan.centers[k];
    part.own_cut = static_cast<int>(k) == cut_center;
    if (!part.own_cut) {
      part.s = grid.log_nodes();
      part.ws.resize(part.s.size());
      for (int i = 0; i < grid.size(); ++i) part.ws[i] = grid.log_weight(i);
      continue;
    }
    std::vector<double> s;
    std::vector<double> ws;
    cut_side_rule(grid, std::log(cut->radius), cut->inside, s, ws);
    part.s = std::move(s);
    part.ws = std::move(ws);
  }
  return plan;
}

void cut_side_rule(const RadialGrid& grid, double s_cut, bool inside, std::vector<double>& s,
                   std::vector<double>& ws) {
  s.clear();
  ws.clear();
  const double h = grid.log_step();
  const double far = inside ? grid.log_min() : grid.log_max();
  const double span = inside ? s_cut - far : far - s_cut;
  if (!(span > 0.0)) return;
  const long n = std::max(1L, static_cast<long>(std::ceil(span / h - 1e-9)));
  const double step = (inside ? -1.0 : 1.0) * span / static_cast<double>(n);
  for (long i = 0; i <= n; ++i) s.push_back(s_cut + static_cast<double>(i) * step);
  ws.assign(s.size(), std::abs(step));
  if (n >= 6) {
    ws[0] *= 3.0 / 8.0;
    ws[1] *= 7.0 / 6.0;
    ws[2] *= 23.0 / 24.0;
  } else {
    ws[0] *= 0.5;
  }
  ws[n] *= 0.5;
}

}  // namespace detail

double integrate_cross(const RadialGrid& grid, const std::function<double(double)>& f, const Point& c1,
                       const std::function<double(double)>& g, const Point& c2, int angular_order) {
  if (angular_order < 8) throw Error(ErrorCode::invalid_params, "angular_order must be at least 8");
  if (c1.size() != grid.dimension() || c2.size() != grid.dimension())
    throw Error(ErrorCode::invalid_params, "center dimension does not match the grid");
  const double d = (c1 - c2).norm();
  if (d == 0.0) return integrate_radial(grid, [&](double r) { return f(r) * g(r); });
  const std::vector<double> z{0.0, d};
  return integrate_axial(
      grid, z, [&](const double* dist, double) { return f(dist[0]) * g(dist[1]); }, angular_order);
}

}  // namespace critvar
