#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace clfpde {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  NonPositiveCoefficient,
  GridTooCoarse,
  CutoffExceedsComputedModes,
  MuCollidesWithSpectrum,
  MuNotPositive,
  CutoffNotStrictlyStable,
  SingularB,
  PlacementFailed,
  LyapunovIndefinite,
  TailBoundFailed,
  KernelTruncationExceedsModes,
  RemainderTooLarge,
  DegenerateDenominator,
  NoAdmissibleZeta,
  NoAdmissibleA,
  Instability,
  StepSizeTooLarge,
  QuadratureBudgetExceeded,
  DegenerateTrajectory,
  ConfigInvalid,
  MalformedCsv,
  Io,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the toolkit; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace clfpde
