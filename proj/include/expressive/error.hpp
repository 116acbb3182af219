#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace expressive {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kUnknownBodyPoint,
  kUnreachableTarget,
  kApproachCollision,
  kInfeasible,
  kParse,
  kValidation,
  kIo,
};

// Machine-parseable identifier printed by the CLI.
inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kDimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::kUnknownBodyPoint: return "UNKNOWN_BODY_POINT";
    case ErrorCode::kUnreachableTarget: return "UNREACHABLE_TARGET";
    case ErrorCode::kApproachCollision: return "APPROACH_COLLISION";
    case ErrorCode::kInfeasible: return "INFEASIBLE";
    case ErrorCode::kParse: return "PARSE_ERROR";
    case ErrorCode::kValidation: return "VALIDATION_ERROR";
    case ErrorCode::kIo: return "IO_ERROR";
  }
  return "UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace expressive
