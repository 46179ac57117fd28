#include "varflow/error.hpp"

namespace varflow {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::NonPositiveDims: return "NonPositiveDims";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::NonPositiveValue: return "NonPositiveValue";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::StoreMismatch: return "StoreMismatch";
    case ErrorCode::IterBudgetZero: return "IterBudgetZero";
    case ErrorCode::NonPositiveDelta: return "NonPositiveDelta";
    case ErrorCode::NonPositiveRange: return "NonPositiveRange";
    case ErrorCode::NonPositiveGamma: return "NonPositiveGamma";
    case ErrorCode::ProbOutOfRange: return "ProbOutOfRange";
    case ErrorCode::RangeExceeded: return "RangeExceeded";
    case ErrorCode::DimTooSmall: return "DimTooSmall";
    case ErrorCode::EmptyLevel: return "EmptyLevel";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) noexcept { return code == ErrorCode::NonFinite; }

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& detail) { throw Error(code, detail); }

}  // namespace varflow
