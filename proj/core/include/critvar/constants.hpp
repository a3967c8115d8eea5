#pragma once

#include <string>

#include "critvar/error.hpp"

namespace critvar {

/// Throws dimension-too-small unless N >= 3.
inline void require_dimension(int N) {
  if (N < 3) throw Error(ErrorCode::dimension_too_small, "N = " + std::to_string(N) + " (need N >= 3)");
}

/// Critical Sobolev exponent 2* = 2N/(N-2).
inline double critical_exponent(int N) { return 2.0 * N / (N - 2.0); }

/// Emden-Fowler exponent q = (N-2)/2; bubbles decay like |x|^{-2q}.
inline double half_codim(int N) { return (N - 2.0) / 2.0; }

/// Optimal Hardy constant (N-2)^2/4.
inline double hardy_constant(int N) { return (N - 2.0) * (N - 2.0) / 4.0; }

/// Surface measure of the unit sphere in R^N, 2 pi^{N/2} / Gamma(N/2).
double sphere_measure(int N);

}  // namespace critvar
