#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stochreal {

enum class ErrorCode {
  kInvalidArgument,
  kNotStable,
  kNotPSD,
  kNotStationary,
  kFamilyViolation,
  kEmptyInput,
  kInsufficientLags,
  kOrderTooLargeForWindow,
  kReconstructionFailure,
  kSingularTransform,
  kDifferentOrders,
  kInfeasible,
  kNotPositiveReal,
  kNoConvergence,
  kNotScalar,
  kDegenerateR,
  kDegenerateInnovation,
};

/// Stable identifier used in machine-readable diagnostics ("NotStable", ...).
std::string_view ErrorName(ErrorCode code);

/// Exception carrying an ErrorCode. Every recoverable failure in the library
/// is reported through this type; refutations of realizability are values,
/// not errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stochreal
