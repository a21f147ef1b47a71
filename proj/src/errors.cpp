#include "mfa/errors.hpp"

namespace mfa {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::NonPositivePrice: return "NonPositivePrice";
    case ErrorCode::NonMonotoneDates: return "NonMonotoneDates";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::DegenerateSeries: return "DegenerateSeries";
    case ErrorCode::ConstantSeries: return "ConstantSeries";
    case ErrorCode::LengthTooShort: return "LengthTooShort";
    case ErrorCode::ScaleTooLarge: return "ScaleTooLarge";
    case ErrorCode::Underdetermined: return "Underdetermined";
    case ErrorCode::AllBoxesDegenerate: return "AllBoxesDegenerate";
    case ErrorCode::InsufficientScales: return "InsufficientScales";
    case ErrorCode::GridTooSmall: return "GridTooSmall";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::EmbeddingFailure: return "EmbeddingFailure";
    case ErrorCode::Cancelled: return "Cancelled";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::GridMismatch:
      return ErrorCategory::Config;
    case ErrorCode::FileNotFound:
    case ErrorCode::IoError:
    case ErrorCode::MalformedRow:
    case ErrorCode::NonPositivePrice:
    case ErrorCode::NonMonotoneDates:
    case ErrorCode::SeriesTooShort:
    case ErrorCode::DegenerateSeries:
    case ErrorCode::ConstantSeries:
    case ErrorCode::LengthTooShort:
    case ErrorCode::ScaleTooLarge:
      return ErrorCategory::Data;
    default:
      return ErrorCategory::Numeric;
  }
}

namespace {
std::string format_message(ErrorCode code, const std::string& detail,
                           std::optional<std::size_t> line) {
  std::string msg(to_string(code));
  if (line) msg += " (line " + std::to_string(*line) + ")";
  if (!detail.empty()) msg += ": " + detail;
  return msg;
}
}  // namespace

Error::Error(ErrorCode code, const std::string& detail,
             std::optional<std::size_t> line)
    : std::runtime_error(format_message(code, detail, line)),
      code_(code),
      line_(line) {}

}  // namespace mfa
