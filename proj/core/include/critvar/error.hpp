#pragma once

#include <stdexcept>
#include <string>

namespace critvar {

/// Failure categories raised by the toolkit. Each operation documents which
/// of these it can produce; callers dispatch on `Error::code()`.
enum class ErrorCode {
  invalid_range,
  dimension_too_small,
  non_finite_integrand,
  coupling_out_of_range,
  nonpositive_scale,
  singular_evaluation,
  invalid_params,
  theta_out_of_range,
  zero_field,
  nonpositive_numerator,
  nonpositive_denominator,
  nonpositive_form,
  linear_solve_failure,
  hypothesis_violated,
  not_radial,
  infeasible_init,
  trust_region_violation,
  nondifferentiable_preset,
  unsupported_geometry,
  config_parse_error,
};

/// Kebab-case name of an error code, as used in reports.
const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace critvar
