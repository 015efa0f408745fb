#include "emofad/error.hpp"

namespace emofad {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "io";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kMalformedHeader: return "malformed_header";
    case ErrorCode::kUnsupportedDtype: return "unsupported_dtype";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kShape: return "shape";
    case ErrorCode::kDuplicateClipId: return "duplicate_clip_id";
    case ErrorCode::kMissingColumn: return "missing_column";
    case ErrorCode::kValueOutOfRange: return "value_out_of_range";
    case ErrorCode::kUnknownClipId: return "unknown_clip_id";
    case ErrorCode::kRowCountMismatch: return "row_count_mismatch";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kInsufficientSamples: return "insufficient_samples";
    case ErrorCode::kNotSymmetric: return "not_symmetric";
    case ErrorCode::kIndefiniteMatrix: return "indefinite_matrix";
    case ErrorCode::kEigenFailure: return "eigen_failure";
    case ErrorCode::kSingularCovariance: return "singular_covariance";
    case ErrorCode::kNegativeDistance: return "negative_distance";
    case ErrorCode::kMissingLabel: return "missing_label";
    case ErrorCode::kTooFewGroups: return "too_few_groups";
    case ErrorCode::kGroupTooSmall: return "group_too_small";
    case ErrorCode::kMissingEmbedding: return "missing_embedding";
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kPairSetMismatch: return "pair_set_mismatch";
    case ErrorCode::kZeroVariance: return "zero_variance";
    case ErrorCode::kSingularSystem: return "singular_system";
    case ErrorCode::kDegenerateInput: return "degenerate_input";
    case ErrorCode::kNotPsd: return "not_psd";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
  }
  return "unknown";
}

}  // namespace emofad
