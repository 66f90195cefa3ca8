#pragma once

#include <stdexcept>
#include <string>

namespace superhedge {

enum class ErrorCode {
  dimension_deficient,
  origin_not_interior,
  too_few_points,
  singular_system,
  not_containing,
  not_lattice_binomial,
  evaluation_failure,
  bad_params,
  not_separable,
  validation_failed,
  not_product_across_blocks,
  convexity_check_failed,
  negative_probability,
  lp_numerical_failure,
  stability_violation,
  non_finite_field,
  non_psd,
  not_in_half_cube,
  structure_certification_failed,
  io_error,
  invalid_config,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::dimension_deficient: return "DimensionDeficient";
    case ErrorCode::origin_not_interior: return "OriginNotInterior";
    case ErrorCode::too_few_points: return "TooFewPoints";
    case ErrorCode::singular_system: return "SingularSystem";
    case ErrorCode::not_containing: return "NotContaining";
    case ErrorCode::not_lattice_binomial: return "NotLatticeBinomial";
    case ErrorCode::evaluation_failure: return "EvaluationFailure";
    case ErrorCode::bad_params: return "BadParams";
    case ErrorCode::not_separable: return "NotSeparable";
    case ErrorCode::validation_failed: return "ValidationFailed";
    case ErrorCode::not_product_across_blocks: return "NotProductAcrossBlocks";
    case ErrorCode::convexity_check_failed: return "ConvexityCheckFailed";
    case ErrorCode::negative_probability: return "NegativeProbability";
    case ErrorCode::lp_numerical_failure: return "LpNumericalFailure";
    case ErrorCode::stability_violation: return "StabilityViolation";
    case ErrorCode::non_finite_field: return "NonFiniteField";
    case ErrorCode::non_psd: return "NonPSD";
    case ErrorCode::not_in_half_cube: return "NotInHalfCube";
    case ErrorCode::structure_certification_failed: return "StructureCertificationFailed";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::invalid_config: return "InvalidConfig";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace superhedge
