#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace biomatch {

enum class ErrorCode {
  kLengthMismatch,
  kDimensionMismatch,
  kNonFiniteInput,
  kZeroVector,
  kVariantMismatch,
  kNonFiniteActivation,
  kNonFiniteGradient,
  kWindowTooLarge,
  kShapeMismatch,
  kDivergenceDetected,
  kMalformedCircuit,
  kEmptyScoreSet,
  kEmptyGrid,
  kSpaceMismatch,
  kCapacityExhausted,
  kCapacityExceeded,
  kDuplicateId,
  kCorruptStore,
  kCorruptModel,
  kInvalidSpec,
  kInvalidArgument,
  kInvalidConfig,
  kAlreadyInitialized,
  kNotInitialized,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every fault raised by the library. Expected negative
/// outcomes (reject, NoMatch, NotFound) are values, never exceptions.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Why a persisted file was rejected.
enum class CorruptKind { kBadMagic, kBadVersion, kTruncated, kMalformed };

std::string_view to_string(CorruptKind kind);

class CorruptFileError : public Error {
 public:
  CorruptFileError(ErrorCode code, CorruptKind kind, const std::string& message)
      : Error(code, std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  CorruptKind kind() const noexcept { return kind_; }

 private:
  CorruptKind kind_;
};

}  // namespace biomatch
