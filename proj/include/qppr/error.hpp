#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qppr {

enum class ErrorCode {
  kInvalidArgument,
  kNegativeInput,
  kOverflow,
  kFormatMismatch,
  kVertexOutOfRange,
  kDuplicateVertex,
  kUnsortedInput,
  kSaturationDetected,
  kCapacityExceeded,
  kCutoffTooLarge,
  kMissingRelevance,
  kInvalidParameters,
  kMalformedLine,
  kEmptyInput,
  kBadMagic,
  kIo,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNegativeInput: return "NegativeInput";
    case ErrorCode::kOverflow: return "Overflow";
    case ErrorCode::kFormatMismatch: return "FormatMismatch";
    case ErrorCode::kVertexOutOfRange: return "VertexOutOfRange";
    case ErrorCode::kDuplicateVertex: return "DuplicateVertex";
    case ErrorCode::kUnsortedInput: return "UnsortedInput";
    case ErrorCode::kSaturationDetected: return "SaturationDetected";
    case ErrorCode::kCapacityExceeded: return "CapacityExceeded";
    case ErrorCode::kCutoffTooLarge: return "CutoffTooLarge";
    case ErrorCode::kMissingRelevance: return "MissingRelevance";
    case ErrorCode::kInvalidParameters: return "InvalidParameters";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

/// Library-wide exception. Every failure carries a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qppr
