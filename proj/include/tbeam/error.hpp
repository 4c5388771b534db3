#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tbeam {

enum class ErrorCode {
  NonPositiveParameter,
  NegativeDamping,
  UnsupportedSpeedRatio,
  GridMismatch,
  DegenerateBoundarySystem,
  ZeroLambda,
  BranchRootNearZero,
  ZeroDenominator,
  NearBranchPoint,
  NegativeDiscriminant,
  ZeroOmega1,
  NegativeRadicand,
  RegimeMismatch,
  BoundaryTooCloseToRoot,
  NonConvergentContour,
  NoConvergence,
  BasinEscape,
  IncompleteBox,
  RankDeficiencyTwo,
  NotAnEigenvalue,
  ZeroMode,
  UnpairedFamily,
  ResolutionTooLow,
  EigensolveFailure,
  SingularSolve,
  WindowTooShort,
  IllConditionedGram,
  InvalidConfig,
};

constexpr std::string_view to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonPositiveParameter: return "NonPositiveParameter";
    case ErrorCode::NegativeDamping: return "NegativeDamping";
    case ErrorCode::UnsupportedSpeedRatio: return "UnsupportedSpeedRatio";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::DegenerateBoundarySystem: return "DegenerateBoundarySystem";
    case ErrorCode::ZeroLambda: return "ZeroLambda";
    case ErrorCode::BranchRootNearZero: return "BranchRootNearZero";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::NearBranchPoint: return "NearBranchPoint";
    case ErrorCode::NegativeDiscriminant: return "NegativeDiscriminant";
    case ErrorCode::ZeroOmega1: return "ZeroOmega1";
    case ErrorCode::NegativeRadicand: return "NegativeRadicand";
    case ErrorCode::RegimeMismatch: return "RegimeMismatch";
    case ErrorCode::BoundaryTooCloseToRoot: return "BoundaryTooCloseToRoot";
    case ErrorCode::NonConvergentContour: return "NonConvergentContour";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::BasinEscape: return "BasinEscape";
    case ErrorCode::IncompleteBox: return "IncompleteBox";
    case ErrorCode::RankDeficiencyTwo: return "RankDeficiencyTwo";
    case ErrorCode::NotAnEigenvalue: return "NotAnEigenvalue";
    case ErrorCode::ZeroMode: return "ZeroMode";
    case ErrorCode::UnpairedFamily: return "UnpairedFamily";
    case ErrorCode::ResolutionTooLow: return "ResolutionTooLow";
    case ErrorCode::EigensolveFailure: return "EigensolveFailure";
    case ErrorCode::SingularSolve: return "SingularSolve";
    case ErrorCode::WindowTooShort: return "WindowTooShort";
    case ErrorCode::IllConditionedGram: return "IllConditionedGram";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

/// Every failure in the library is reported through this type; `code()` is
/// what the CLI serializes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tbeam
