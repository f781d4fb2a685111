#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mvembed {

enum class ErrorCode {
  InvalidArgument,
  Io,
  Parse,
  MismatchedSampleCount,
  NonFiniteValue,
  InvalidSpec,
  KTooLarge,
  DegenerateNeighborhood,
  EigenFailure,
  TooFewSamples,
  EmptyRelevantSet,
};

/// Broad failure class; the CLI maps these onto process exit codes.
enum class ErrorCategory { Usage = 1, Data = 2, Numeric = 3 };

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::MismatchedSampleCount: return "MismatchedSampleCount";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::DegenerateNeighborhood: return "DegenerateNeighborhood";
    case ErrorCode::EigenFailure: return "EigenFailure";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::EmptyRelevantSet: return "EmptyRelevantSet";
  }
  return "Unknown";
}

constexpr ErrorCategory category(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidSpec:
    case ErrorCode::KTooLarge:
      return ErrorCategory::Usage;
    case ErrorCode::DegenerateNeighborhood:
    case ErrorCode::EigenFailure:
      return ErrorCategory::Numeric;
    default:
      return ErrorCategory::Data;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Re-throws `e` with `context` prepended to its message, keeping the code.
[[noreturn]] inline void rethrow_with_context(const Error& e, const std::string& context) {
  throw Error(e.code(), context + ": " + e.what());
}

}  // namespace mvembed
