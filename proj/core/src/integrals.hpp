#pragma once

// Field integrals shared by the energy, coefficient, obstruction and
// localization modules. Every integral is of the form int w(x) Q(u)(x) dx with
// Q one of |grad u|^2, u^2/|x|^2, |u|^{2*}, and w a radial weight about some
// point. Quadratic quantities are expanded into pair terms so that each piece
// involves as few centers as possible; the pieces are then reduced to the
// axial integrator, or to a one-dimensional radial integral in Emden-Fowler
// variables when every center involved coincides.

#include <functional>
#include <optional>

#include "critvar/coefficients.hpp"
#include "critvar/fields.hpp"
#include "critvar/quadrature.hpp"

namespace critvar::detail {

enum class Quantity { Dirichlet, Hardy, Critical };

struct Weight {
  Point center;
  /// w as a function of r = |x - center| and z = (x - center) . axis.
  std::function<double(double r, double z)> f;
  bool uses_axial = false;
  /// Axis for weights that use z; must be compatible with the field centers.
  Point axis;
  std::optional<double> cut_radius;
  bool cut_inside = true;
};

/// int w Q(u); `w == nullptr` means w = 1.
/// Errors: unsupported-geometry (centers not collinear), non-finite-integrand.
double integrate_field(const Field& u, Quantity q, const Weight* w, const QuadratureSettings& set);

/// int c(x) Q(u)(x) for a coefficient c = constant + atoms.
double integrate_coefficient(const Field& u, Quantity q, const CoefficientProfile& c,
                             const QuadratureSettings& set);

/// Weight of a single atom.
Weight atom_weight(const Atom& atom);

}  // namespace critvar::detail
