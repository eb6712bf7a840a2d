#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hlt {

enum class ErrorCode {
  kInvalidArgument,
  kDomain,
  kOrderOverflow,
  kCutoffTooSmall,
  kCutoffCapExceeded,
  kDimensionMismatch,
  kNotHermitian,
  kUnequalEfficiencies,
  kUnsupportedPrep,
  kOutOfGrid,
  kUnstable,
  kEmptyInput,
  kPhaseCoverage,
  kIo,
  kSchema,
  kFitFailure,
  kUncalibratedStep,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. The code is what callers dispatch on; the message
/// is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace hlt
