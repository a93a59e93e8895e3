#include "poselift/error.hpp"

namespace poselift {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::CycleDetected: return "CycleDetected";
    case ErrorKind::MultipleRoots: return "MultipleRoots";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::WrongFrame: return "WrongFrame";
    case ErrorKind::SkeletonMismatch: return "SkeletonMismatch";
    case ErrorKind::NonAffineWeights: return "NonAffineWeights";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::BehindCamera: return "BehindCamera";
    case ErrorKind::DegenerateSpread: return "DegenerateSpread";
    case ErrorKind::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorKind::FrameMismatch: return "FrameMismatch";
    case ErrorKind::BadRange: return "BadRange";
    case ErrorKind::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorKind::EmptyAfterSampling: return "EmptyAfterSampling";
    case ErrorKind::LabelMismatch: return "LabelMismatch";
    case ErrorKind::TooFewPoses: return "TooFewPoses";
    case ErrorKind::IncompleteMap: return "IncompleteMap";
    case ErrorKind::InsufficientFrames: return "InsufficientFrames";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::AssetDecodeError: return "AssetDecodeError";
    case ErrorKind::BadProportions: return "BadProportions";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

}  // namespace poselift
