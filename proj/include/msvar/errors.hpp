#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace msvar {

enum class ErrorKind {
  NonStochasticTransition,
  NonPositiveDefiniteCovariance,
  ShapeMismatch,
  UnsupportedCovariance,
  IndexOutOfRange,
  SingularPsi,
  RankDeficientConstraint,
  DegenerateKernel,
  NoConvergence,
  SingularAssetCovariance,
  EnumerationCapExceeded,
  AllZeroLikelihood,
  InsufficientDraws,
  MissingStrike,
  McBudgetExceeded,
  ToleranceNotMet,
  ParseError,
  ValidationError,
  Usage,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

/// True for the kinds that indicate bad input rather than a numerical failure.
[[nodiscard]] bool is_validation_kind(ErrorKind kind) noexcept;

}  // namespace msvar
