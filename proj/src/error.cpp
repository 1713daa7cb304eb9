#include "biomatch/error.hpp"

namespace biomatch {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kVariantMismatch: return "VariantMismatch";
    case ErrorCode::kNonFiniteActivation: return "NonFiniteActivation";
    case ErrorCode::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::kWindowTooLarge: return "WindowTooLarge";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kDivergenceDetected: return "DivergenceDetected";
    case ErrorCode::kMalformedCircuit: return "MalformedCircuit";
    case ErrorCode::kEmptyScoreSet: return "EmptyScoreSet";
    case ErrorCode::kEmptyGrid: return "EmptyGrid";
    case ErrorCode::kSpaceMismatch: return "SpaceMismatch";
    case ErrorCode::kCapacityExhausted: return "CapacityExhausted";
    case ErrorCode::kCapacityExceeded: return "CapacityExceeded";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kCorruptStore: return "CorruptStore";
    case ErrorCode::kCorruptModel: return "CorruptModel";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kAlreadyInitialized: return "AlreadyInitialized";
    case ErrorCode::kNotInitialized: return "NotInitialized";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

std::string_view to_string(CorruptKind kind) {
  switch (kind) {
    case CorruptKind::kBadMagic: return "bad-magic";
    case CorruptKind::kBadVersion: return "bad-version";
    case CorruptKind::kTruncated: return "truncation";
    case CorruptKind::kMalformed: return "malformed";
  }
  return "unknown";
}

}  // namespace biomatch
