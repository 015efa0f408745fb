#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace emofad {

enum class ErrorCode {
  kIo,
  kParse,
  kMalformedHeader,
  kUnsupportedDtype,
  kNonFinite,
  kShape,
  kDuplicateClipId,
  kMissingColumn,
  kValueOutOfRange,
  kUnknownClipId,
  kRowCountMismatch,
  kDimensionMismatch,
  kInsufficientSamples,
  kNotSymmetric,
  kIndefiniteMatrix,
  kEigenFailure,
  kSingularCovariance,
  kNegativeDistance,
  kMissingLabel,
  kTooFewGroups,
  kGroupTooSmall,
  kMissingEmbedding,
  kEmptyInput,
  kPairSetMismatch,
  kZeroVariance,
  kSingularSystem,
  kDegenerateInput,
  kNotPsd,
  kInvalidArgument,
};

/// Stable, machine-parsable name used in `ERROR <code>: <detail>` lines.
std::string_view error_code_name(ErrorCode code);

/// All library failures are reported through this exception type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace emofad
