#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace varflow {

enum class ErrorCode {
  BadMagic,
  Truncated,
  NonPositiveDims,
  IoFailure,
  NonPositiveValue,
  OutOfRange,
  DimMismatch,
  NonFinite,
  StoreMismatch,
  IterBudgetZero,
  NonPositiveDelta,
  NonPositiveRange,
  NonPositiveGamma,
  ProbOutOfRange,
  RangeExceeded,
  DimTooSmall,
  EmptyLevel,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for errors that signal a numerical breakdown rather than bad input data.
bool is_numerical(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& detail);

}  // namespace varflow
