#include "dpw/error.hpp"

namespace dpw {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroLambda:
      return "ZeroLambda";
    case ErrorCode::NonAnalyticEvaluation:
      return "NonAnalyticEvaluation";
    case ErrorCode::GridMismatch:
      return "GridMismatch";
    case ErrorCode::SingularSample:
      return "SingularSample";
    case ErrorCode::IdenticallyZero:
      return "IdenticallyZero";
    case ErrorCode::NegativeValue:
      return "NegativeValue";
    case ErrorCode::ZeroDetectionFailure:
      return "ZeroDetectionFailure";
    case ErrorCode::FactorizationDiverged:
      return "FactorizationDiverged";
    case ErrorCode::NotHermitian:
      return "NotHermitian";
    case ErrorCode::NotSemidefinite:
      return "NotSemidefinite";
    case ErrorCode::DegenerateDeterminant:
      return "DegenerateDeterminant";
    case ErrorCode::ZeroParameter:
      return "ZeroParameter";
    case ErrorCode::WeightOutOfBounds:
      return "WeightOutOfBounds";
    case ErrorCode::EvaluationAtPuncture:
      return "EvaluationAtPuncture";
    case ErrorCode::NegativeRadicand:
      return "NegativeRadicand";
    case ErrorCode::GaugeNotPlus:
      return "GaugeNotPlus";
    case ErrorCode::StepSizeUnderflow:
      return "StepSizeUnderflow";
    case ErrorCode::ToleranceNotMet:
      return "ToleranceNotMet";
    case ErrorCode::PathTooClose:
      return "PathTooClose";
    case ErrorCode::DegenerateFamily:
      return "DegenerateFamily";
    case ErrorCode::AlignmentFailure:
      return "AlignmentFailure";
    case ErrorCode::KernelJump:
      return "KernelJump";
    case ErrorCode::AllZeroSymmetrization:
      return "AllZeroSymmetrization";
    case ErrorCode::OddSwitchCount:
      return "OddSwitchCount";
    case ErrorCode::UnitarizationResidualTooLarge:
      return "UnitarizationResidualTooLarge";
    case ErrorCode::SymPointsCoincide:
      return "SymPointsCoincide";
    case ErrorCode::PeriodResidualTooLarge:
      return "PeriodResidualTooLarge";
    case ErrorCode::ParameterGate:
      return "ParameterGate";
    case ErrorCode::IOError:
      return "IOError";
    case ErrorCode::UnprojectablePoint:
      return "UnprojectablePoint";
    case ErrorCode::ConfigParseError:
      return "ConfigParseError";
    case ErrorCode::InvalidArgument:
      return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace dpw
