#include "clfpde/error.hpp"

namespace clfpde {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonPositiveCoefficient: return "NonPositiveCoefficient";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::CutoffExceedsComputedModes: return "CutoffExceedsComputedModes";
    case ErrorCode::MuCollidesWithSpectrum: return "MuCollidesWithSpectrum";
    case ErrorCode::MuNotPositive: return "MuNotPositive";
    case ErrorCode::CutoffNotStrictlyStable: return "CutoffNotStrictlyStable";
    case ErrorCode::SingularB: return "SingularB";
    case ErrorCode::PlacementFailed: return "PlacementFailed";
    case ErrorCode::LyapunovIndefinite: return "LyapunovIndefinite";
    case ErrorCode::TailBoundFailed: return "TailBoundFailed";
    case ErrorCode::KernelTruncationExceedsModes: return "KernelTruncationExceedsModes";
    case ErrorCode::RemainderTooLarge: return "RemainderTooLarge";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::NoAdmissibleZeta: return "NoAdmissibleZeta";
    case ErrorCode::NoAdmissibleA: return "NoAdmissibleA";
    case ErrorCode::Instability: return "Instability";
    case ErrorCode::StepSizeTooLarge: return "StepSizeTooLarge";
    case ErrorCode::QuadratureBudgetExceeded: return "QuadratureBudgetExceeded";
    case ErrorCode::DegenerateTrajectory: return "DegenerateTrajectory";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace clfpde
