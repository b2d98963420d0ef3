#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gcattack {

enum class ErrorCode {
  // graph construction and queries
  CycleDetected,
  UnknownLabelName,
  DuplicateLabelName,
  DuplicateEdge,
  InvalidLabelId,
  NoCommonAncestor,
  // states and target sets
  LengthMismatch,
  InvalidState,
  DirectionMismatch,
  NonConvergence,
  EmptyTargetSet,
  // model
  EmptySubset,
  ShapeMismatch,
  NoLeaves,
  // attack
  GammaMissing,
  OmegaNotInGamma,
  // evaluation
  NotEnoughPresentLabels,
  EmptySuccessSet,
  EmptyAttackSet,
  // oracle
  BudgetExceeded,
  // generic
  InvalidArgument,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; the code allows exact matching in
// tests and exit-code mapping in the CLI.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

  /// Same error with `context` prepended to the message.
  Error with_context(const std::string& context) const { return Error(code_, context + ": " + detail_); }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace gcattack
