#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dpw {

enum class ErrorCode {
  ZeroLambda,
  NonAnalyticEvaluation,
  GridMismatch,
  SingularSample,
  IdenticallyZero,
  NegativeValue,
  ZeroDetectionFailure,
  FactorizationDiverged,
  NotHermitian,
  NotSemidefinite,
  DegenerateDeterminant,
  ZeroParameter,
  WeightOutOfBounds,
  EvaluationAtPuncture,
  NegativeRadicand,
  GaugeNotPlus,
  StepSizeUnderflow,
  ToleranceNotMet,
  PathTooClose,
  DegenerateFamily,
  AlignmentFailure,
  KernelJump,
  AllZeroSymmetrization,
  OddSwitchCount,
  UnitarizationResidualTooLarge,
  SymPointsCoincide,
  PeriodResidualTooLarge,
  ParameterGate,
  IOError,
  UnprojectablePoint,
  ConfigParseError,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this exception type; `code`
// identifies the failure class, `what()` carries the numbers involved.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dpw
