#pragma once

#include <stdexcept>
#include <string>

namespace poselift {

enum class ErrorKind {
  CycleDetected,
  MultipleRoots,
  IndexOutOfRange,
  ParseError,
  InvariantViolation,
  WrongFrame,
  SkeletonMismatch,
  NonAffineWeights,
  InsufficientSamples,
  BehindCamera,
  DegenerateSpread,
  NonPositiveDepth,
  FrameMismatch,
  BadRange,
  DegenerateConfiguration,
  EmptyAfterSampling,
  LabelMismatch,
  TooFewPoses,
  IncompleteMap,
  InsufficientFrames,
  ShapeMismatch,
  RankDeficient,
  DimMismatch,
  AssetDecodeError,
  BadProportions,
  IoError,
  InvalidArgument,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(std::string(to_string(kind)) + ": " + msg), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

}  // namespace poselift
