#pragma once

#include <stdexcept>
#include <string>

namespace smoothlasso {

enum class ErrorCode {
  ConstantColumn,
  RankDeficient,
  NotApplicable,
  NonFinite,
  TooLarge,
  DimensionMismatch,
  DegenerateWeights,
  TooFewColumns,
  EmptyList,
  InvalidArgument,
  ParseError,
  IoError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConstantColumn: return "ConstantColumn";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NotApplicable: return "NotApplicable";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateWeights: return "DegenerateWeights";
    case ErrorCode::TooFewColumns: return "TooFewColumns";
    case ErrorCode::EmptyList: return "EmptyList";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace smoothlasso
