#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mfa {

enum class ErrorCode {
  // configuration
  InvalidConfig,
  GridMismatch,
  // input data
  FileNotFound,
  IoError,
  MalformedRow,
  NonPositivePrice,
  NonMonotoneDates,
  SeriesTooShort,
  DegenerateSeries,
  ConstantSeries,
  LengthTooShort,
  ScaleTooLarge,
  // numerics
  Underdetermined,
  AllBoxesDegenerate,
  InsufficientScales,
  GridTooSmall,
  RankDeficient,
  EmbeddingFailure,
  Cancelled,
};

enum class ErrorCategory { Config, Data, Numeric };

std::string_view to_string(ErrorCode code);
ErrorCategory category_of(ErrorCode code);

/// Single exception type thrown by the library. `line()` is set for CSV
/// errors tied to a physical line of the input file (1-based, header = 1).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail,
        std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace mfa
