#include "integrals.hpp"

#include <algorithm>
#include <cmath>

namespace critvar::detail {
namespace {

// Decades of decay (natural log units) kept beyond each feature: e^{-40} < 1e-17.
constexpr double kTail = 40.0;

struct Piece {
  std::vector<int> terms;
  double factor = 1.0;
};

// Trapezoid over the lattice nodes, or over the kept side of s_cut with an end correction at the cut.
template <class G>
double radial_sum(const RadialGrid& grid, G&& g, std::optional<double> s_cut, bool inside) {
  std::vector<double> s;
  std::vector<double> ws;
  if (!s_cut) {
    s = grid.log_nodes();
    for (int i = 0; i < grid.size(); ++i) ws.push_back(grid.log_weight(i));
  } else {
    cut_side_rule(grid, *s_cut, inside, s, ws);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double value = g(s[i]);
    if (!std::isfinite(value)) throw_non_finite(std::exp(s[i]));
    sum += ws[i] * value;
  }
  return sphere_measure(grid.dimension()) * sum;
}

double piece_integral(const Field& u, Quantity q, const Piece& piece, const Weight* w,
                      const QuadratureSettings& set) {
  const int N = u.dimension();
  const auto& terms = u.terms();
  const int nt = static_cast<int>(piece.terms.size());

  std::vector<Point> points;
  for (int i : piece.terms) points.push_back(terms[i].center);
  const int origin_index = q == Quantity::Hardy ? static_cast<int>(points.size()) : -1;
  if (q == Quantity::Hardy) points.push_back(origin(N));
  const int weight_index = w ? static_cast<int>(points.size()) : -1;
  if (w) points.push_back(w->center);

  const Point* preferred = (w && w->uses_axial) ? &w->axis : nullptr;
  const auto frame = collinear_frame(points, preferred);
  if (!frame)
    throw Error(ErrorCode::unsupported_geometry,
                "field centers, coefficient centers and the origin must be collinear for this integral");
  const std::vector<double>& z = frame->coords;
  // The frame axis is forced by the points; an axial weight must use the same line.
  if (w && w->uses_axial && frame->axis.dot(w->axis.normalized()) < 1.0 - 1e-9)
    throw Error(ErrorCode::unsupported_geometry, "axial weight is not aligned with the field axis");

  double zscale = 1.0;
  for (double v : z) zscale = std::max(zscale, std::abs(v));
  double dmin = std::numeric_limits<double>::infinity();
  double dmax = 0.0;
  for (std::size_t a = 0; a < z.size(); ++a)
    for (std::size_t b = a + 1; b < z.size(); ++b) {
      const double d = std::abs(z[a] - z[b]);
      if (d > 1e-13 * zscale) {
        dmin = std::min(dmin, d);
        dmax = std::max(dmax, d);
      }
    }
  const bool coincident = dmax == 0.0 && !(w && w->uses_axial);

  double s_lo = std::numeric_limits<double>::infinity();
  double s_hi = -std::numeric_limits<double>::infinity();
  for (int i : piece.terms) {
    const auto [lo, hi] = terms[i].profile.log_support();
    s_lo = std::min(s_lo, lo);
    s_hi = std::max(s_hi, hi);
  }
  if (dmax > 0.0) {
    s_lo = std::min(s_lo, std::log(dmin) - kTail / (N - 2.0));
    s_hi = std::max(s_hi, std::log(dmax) + kTail / (N - 2.0));
  }
  if (w && w->cut_radius) {
    s_lo = std::min(s_lo, std::log(*w->cut_radius) - 1.0);
    s_hi = std::max(s_hi, std::log(*w->cut_radius) + 1.0);
  }

  const double p = critical_exponent(N);
  std::vector<double> amp(nt);
  std::vector<const RadialProfile*> prof(nt);
  for (int a = 0; a < nt; ++a) {
    amp[a] = terms[piece.terms[a]].amplitude;
    prof[a] = &terms[piece.terms[a]].profile;
  }

  if (coincident) {
    const RadialGrid grid = set.lattice.covering(s_lo, s_hi);
    auto g = [&](double s) {
      const double rho = std::exp(s);
      const double weight = w ? w->f(rho, 0.0) : 1.0;
      if (weight == 0.0) return 0.0;
      switch (q) {
        case Quantity::Dirichlet:
          if (nt == 1) {
            const double d = prof[0]->scaled_derivative(s);
            return weight * d * d;
          }
          return weight * prof[0]->scaled_derivative(s) * prof[1]->scaled_derivative(s);
        case Quantity::Hardy:
          if (nt == 1) {
            const double v = prof[0]->scaled_value(s);
            return weight * v * v;
          }
          return weight * prof[0]->scaled_value(s) * prof[1]->scaled_value(s);
        case Quantity::Critical: {
          double v = 0.0;
          for (int a = 0; a < nt; ++a) v += amp[a] * prof[a]->scaled_value(s);
          return weight * std::pow(std::abs(v), p);
        }
      }
      return 0.0;
    };
    std::optional<double> s_cut;
    if (w && w->cut_radius) s_cut = std::log(*w->cut_radius);
    return piece.factor * radial_sum(grid, g, s_cut, w ? w->cut_inside : true);
  }

  const RadialGrid grid = set.lattice.covering(s_lo, s_hi).clipped(-600.0 / N, 600.0 / N);
  const double d01 = nt == 2 ? std::abs(z[0] - z[1]) : 0.0;
  const double zw = w ? z[weight_index] : 0.0;
  auto kernel = [&](const double* dist, double axial) {
    double weight = 1.0;
    if (w) {
      weight = w->f(dist[weight_index], axial - zw);
      if (weight == 0.0) return 0.0;
    }
    switch (q) {
      case Quantity::Dirichlet: {
        if (nt == 1) {
          const double d = prof[0]->derivative(dist[0]);
          return weight * d * d;
        }
        const double r0 = dist[0];
        const double r1 = dist[1];
        double c = d01 == 0.0 ? 1.0 : (r0 * r0 + r1 * r1 - d01 * d01) / (2.0 * r0 * r1);
        c = std::clamp(c, -1.0, 1.0);
        return weight * prof[0]->derivative(r0) * prof[1]->derivative(r1) * c;
      }
      case Quantity::Hardy: {
        const double r = dist[origin_index];
        const double v = nt == 1 ? prof[0]->value(dist[0]) * prof[0]->value(dist[0])
                                 : prof[0]->value(dist[0]) * prof[1]->value(dist[1]);
        return weight * v / (r * r);
      }
      case Quantity::Critical: {
        double v = 0.0;
        for (int a = 0; a < nt; ++a) v += amp[a] * prof[a]->value(dist[a]);
        return weight * std::pow(std::abs(v), p);
      }
    }
    return 0.0;
  };
  std::optional<AxialCut> cut;
  if (w && w->cut_radius) cut = AxialCut{zw, *w->cut_radius, w->cut_inside};
  return piece.factor * integrate_axial(grid, z, kernel, set.angular_order, cut);
}

}  // namespace

double integrate_field(const Field& u, Quantity q, const Weight* w, const QuadratureSettings& set) {
  if (u.empty()) return 0.0;
  const int nt = static_cast<int>(u.terms().size());
  double total = 0.0;
  if (q == Quantity::Critical) {
    Piece piece;
    for (int i = 0; i < nt; ++i) piece.terms.push_back(i);
    return piece_integral(u, q, piece, w, set);
  }
  for (int i = 0; i < nt; ++i) {
    for (int j = i; j < nt; ++j) {
      const double ti = u.terms()[i].amplitude;
      const double tj = u.terms()[j].amplitude;
      if (ti == 0.0 || tj == 0.0) continue;
      Piece piece;
      piece.terms = i == j ? std::vector<int>{i} : std::vector<int>{i, j};
      piece.factor = (i == j ? 1.0 : 2.0) * ti * tj;
      total += piece_integral(u, q, piece, w, set);
    }
  }
  return total;
}

Weight atom_weight(const Atom& atom) {
  Weight w;
  w.center = atom.center;
  w.f = [atom](double r, double) { return atom.value(r); };
  return w;
}

double integrate_coefficient(const Field& u, Quantity q, const CoefficientProfile& c,
                             const QuadratureSettings& set) {
  double total = 0.0;
  if (c.constant() != 0.0) total += c.constant() * integrate_field(u, q, nullptr, set);
  for (const Atom& atom : c.atoms()) {
    const Weight w = atom_weight(atom);
    total += integrate_field(u, q, &w, set);
  }
  return total;
}

}  // namespace critvar::detail
