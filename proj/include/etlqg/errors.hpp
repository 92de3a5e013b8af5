#pragma once

#include <stdexcept>
#include <string>

namespace etlqg {

enum class ErrorCode {
  DimensionMismatch,
  NotPSD,
  NotPD,
  NonPositiveHorizon,
  SingularS,
  WindowMismatch,
  WindowTooLarge,
  LengthMismatch,
  MalformedProblem,
  OracleDisagreement,
  SoundnessViolation,
  StatisticalViolation,
  InvalidArgument,
  IoError,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::NotPD: return "NotPD";
    case ErrorCode::NonPositiveHorizon: return "NonPositiveHorizon";
    case ErrorCode::SingularS: return "SingularS";
    case ErrorCode::WindowMismatch: return "WindowMismatch";
    case ErrorCode::WindowTooLarge: return "WindowTooLarge";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::MalformedProblem: return "MalformedProblem";
    case ErrorCode::OracleDisagreement: return "OracleDisagreement";
    case ErrorCode::SoundnessViolation: return "SoundnessViolation";
    case ErrorCode::StatisticalViolation: return "StatisticalViolation";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

  // Property violations map to a distinct process exit code in the CLI.
  bool is_property_violation() const {
    return code_ == ErrorCode::OracleDisagreement ||
           code_ == ErrorCode::SoundnessViolation ||
           code_ == ErrorCode::StatisticalViolation;
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace etlqg
