#include "gcattack/error.hpp"

namespace gcattack {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::UnknownLabelName: return "UnknownLabelName";
    case ErrorCode::DuplicateLabelName: return "DuplicateLabelName";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::InvalidLabelId: return "InvalidLabelId";
    case ErrorCode::NoCommonAncestor: return "NoCommonAncestor";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::DirectionMismatch: return "DirectionMismatch";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::EmptyTargetSet: return "EmptyTargetSet";
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NoLeaves: return "NoLeaves";
    case ErrorCode::GammaMissing: return "GammaMissing";
    case ErrorCode::OmegaNotInGamma: return "OmegaNotInGamma";
    case ErrorCode::NotEnoughPresentLabels: return "NotEnoughPresentLabels";
    case ErrorCode::EmptySuccessSet: return "EmptySuccessSet";
    case ErrorCode::EmptyAttackSet: return "EmptyAttackSet";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace gcattack
