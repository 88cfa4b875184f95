#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cobra {

enum class ErrorCode {
  // ingestion / input validation
  WrongArity,
  NegativeEntry,
  SumOutOfTolerance,
  ParseError,
  IoError,
  InvalidArgument,
  DimensionMismatch,
  LabelOutOfRange,
  MissingLabels,
  NotSymmetric,
  CheckpointMismatch,
  // scoring policy
  EmptyRelevantSubset,
  // statistical degeneracy
  LengthMismatch,
  DegenerateVariance,
  RhoOutOfRange,
  TooFewPairs,
  TooManyDegenerateResamples,
  InsufficientOverlap,
  DegenerateData,
  TooFewRows,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it onto a stable exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cobra
