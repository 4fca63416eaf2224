#include "msvar/errors.hpp"

namespace msvar {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonStochasticTransition: return "NonStochasticTransition";
    case ErrorKind::NonPositiveDefiniteCovariance: return "NonPositiveDefiniteCovariance";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::UnsupportedCovariance: return "UnsupportedCovariance";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::SingularPsi: return "SingularPsi";
    case ErrorKind::RankDeficientConstraint: return "RankDeficientConstraint";
    case ErrorKind::DegenerateKernel: return "DegenerateKernel";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::SingularAssetCovariance: return "SingularAssetCovariance";
    case ErrorKind::EnumerationCapExceeded: return "EnumerationCapExceeded";
    case ErrorKind::AllZeroLikelihood: return "AllZeroLikelihood";
    case ErrorKind::InsufficientDraws: return "InsufficientDraws";
    case ErrorKind::MissingStrike: return "MissingStrike";
    case ErrorKind::McBudgetExceeded: return "McBudgetExceeded";
    case ErrorKind::ToleranceNotMet: return "ToleranceNotMet";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::Usage: return "Usage";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

bool is_validation_kind(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonStochasticTransition:
    case ErrorKind::NonPositiveDefiniteCovariance:
    case ErrorKind::ShapeMismatch:
    case ErrorKind::UnsupportedCovariance:
    case ErrorKind::IndexOutOfRange:
    case ErrorKind::MissingStrike:
    case ErrorKind::ParseError:
    case ErrorKind::ValidationError:
    case ErrorKind::InsufficientDraws:
      return true;
    default:
      return false;
  }
}

}  // namespace msvar
