#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace slsf {

enum class ErrorCode {
  kDimensionMismatch,
  kInfeasible,
  kUnbounded,
  kEmpty,
  kNotConverged,
  kNotStable,
  kNotStabilizable,
  kDimensionTooLarge,
  kSingularResponse,
  kHistoryInconsistent,
  kInitialStateOutsideSafeSet,
  kSolverFailure,
  kInvalidArgument,
  kConfig,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. Callers switch on code() rather than on type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kUnbounded: return "Unbounded";
    case ErrorCode::kEmpty: return "Empty";
    case ErrorCode::kNotConverged: return "NotConverged";
    case ErrorCode::kNotStable: return "NotStable";
    case ErrorCode::kNotStabilizable: return "NotStabilizable";
    case ErrorCode::kDimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::kSingularResponse: return "SingularResponse";
    case ErrorCode::kHistoryInconsistent: return "HistoryInconsistent";
    case ErrorCode::kInitialStateOutsideSafeSet: return "InitialStateOutsideSafeSet";
    case ErrorCode::kSolverFailure: return "SolverFailure";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kConfig: return "ConfigError";
  }
  return "Unknown";
}

#define SLSF_THROW_UNLESS(cond, code, msg)          \
  do {                                              \
    if (!(cond)) throw ::slsf::Error((code), (msg)); \
  } while (0)

}  // namespace slsf
