#include "hlt/errors.hpp"

namespace hlt {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kOrderOverflow: return "order_overflow";
    case ErrorCode::kCutoffTooSmall: return "cutoff_too_small";
    case ErrorCode::kCutoffCapExceeded: return "cutoff_cap_exceeded";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kNotHermitian: return "not_hermitian";
    case ErrorCode::kUnequalEfficiencies: return "unequal_efficiencies";
    case ErrorCode::kUnsupportedPrep: return "unsupported_prep";
    case ErrorCode::kOutOfGrid: return "out_of_grid";
    case ErrorCode::kUnstable: return "unstable";
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kPhaseCoverage: return "phase_coverage";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kSchema: return "schema";
    case ErrorCode::kFitFailure: return "fit_failure";
    case ErrorCode::kUncalibratedStep: return "uncalibrated_step";
  }
  return "unknown";
}

}  // namespace hlt
