#include "critvar/error.hpp"

namespace critvar {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_range: return "invalid-range";
    case ErrorCode::dimension_too_small: return "dimension-too-small";
    case ErrorCode::non_finite_integrand: return "non-finite-integrand";
    case ErrorCode::coupling_out_of_range: return "coupling-out-of-range";
    case ErrorCode::nonpositive_scale: return "nonpositive-scale";
    case ErrorCode::singular_evaluation: return "singular-evaluation";
    case ErrorCode::invalid_params: return "invalid-params";
    case ErrorCode::theta_out_of_range: return "theta-out-of-range";
    case ErrorCode::zero_field: return "zero-field";
    case ErrorCode::nonpositive_numerator: return "nonpositive-numerator";
    case ErrorCode::nonpositive_denominator: return "nonpositive-denominator";
    case ErrorCode::nonpositive_form: return "nonpositive-form";
    case ErrorCode::linear_solve_failure: return "linear-solve-failure";
    case ErrorCode::hypothesis_violated: return "hypothesis-violated";
    case ErrorCode::not_radial: return "not-radial";
    case ErrorCode::infeasible_init: return "infeasible-init";
    case ErrorCode::trust_region_violation: return "trust-region-violation";
    case ErrorCode::nondifferentiable_preset: return "nondifferentiable-preset";
    case ErrorCode::unsupported_geometry: return "unsupported-geometry";
    case ErrorCode::config_parse_error: return "config-parse-error";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace critvar
