#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nhfrac {

enum class ErrorCode {
  MetricViolation,
  NonpositiveWeight,
  LambdaNotMonotone,
  LambdaAtZero,
  FamilyTooLarge,
  DegenerateBall,
  CoverGuaranteeFailed,
  KTooLarge,
  ConfigInfeasible,
  ZeroRbmo,
  DominationDegenerate,
  PreconditionViolation,
  InvalidInput,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MetricViolation: return "METRIC_VIOLATION";
    case ErrorCode::NonpositiveWeight: return "NONPOSITIVE_WEIGHT";
    case ErrorCode::LambdaNotMonotone: return "LAMBDA_NOT_MONOTONE";
    case ErrorCode::LambdaAtZero: return "LAMBDA_AT_ZERO";
    case ErrorCode::FamilyTooLarge: return "FAMILY_TOO_LARGE";
    case ErrorCode::DegenerateBall: return "DEGENERATE_BALL";
    case ErrorCode::CoverGuaranteeFailed: return "COVER_GUARANTEE_FAILED";
    case ErrorCode::KTooLarge: return "K_TOO_LARGE";
    case ErrorCode::ConfigInfeasible: return "CONFIG_INFEASIBLE";
    case ErrorCode::ZeroRbmo: return "ZERO_RBMO";
    case ErrorCode::DominationDegenerate: return "DOMINATION_DEGENERATE";
    case ErrorCode::PreconditionViolation: return "PRECONDITION_VIOLATION";
    case ErrorCode::InvalidInput: return "INVALID_INPUT";
  }
  return "UNKNOWN";
}

/// Library error carrying a machine-readable code and, where one exists, the
/// point indices that witness the failure (e.g. the violating triple of a
/// triangle-inequality check).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::vector<std::size_t> witness = {})
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        witness_(std::move(witness)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<std::size_t>& witness() const noexcept { return witness_; }

 private:
  ErrorCode code_;
  std::vector<std::size_t> witness_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace nhfrac
