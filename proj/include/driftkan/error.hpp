#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace driftkan {

enum class ErrorCode {
  FileNotFound,
  ParseError,
  RaggedRows,
  EmptyInput,
  InvalidSpec,
  IndivisibleLength,
  WidthTooLarge,
  DimensionMismatch,
  CacheMismatch,
  InvalidDims,
  IndexOutOfRange,
  TooFewPatches,
  NonFiniteLoss,
  InvalidConfig,
  UnknownConcept,
  EmptySegments,
  EmptySequence,
  UnknownLabel,
  NoHistoryForConcept,
  UnsortedInput,
  LengthMismatch,
  InvalidFormat,
};

const char* to_string(ErrorCode code);

// Single exception type for the library. `row`/`col`/`epoch` carry the
// location payload for ParseError, RaggedRows and NonFiniteLoss.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::int64_t row = -1, std::int64_t col = -1)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        row_(row),
        col_(col) {}

  ErrorCode code() const noexcept { return code_; }
  std::int64_t row() const noexcept { return row_; }
  std::int64_t col() const noexcept { return col_; }
  std::int64_t epoch() const noexcept { return row_; }

 private:
  ErrorCode code_;
  std::int64_t row_;
  std::int64_t col_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::RaggedRows: return "RaggedRows";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::IndivisibleLength: return "IndivisibleLength";
    case ErrorCode::WidthTooLarge: return "WidthTooLarge";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::CacheMismatch: return "CacheMismatch";
    case ErrorCode::InvalidDims: return "InvalidDims";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::TooFewPatches: return "TooFewPatches";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::UnknownConcept: return "UnknownConcept";
    case ErrorCode::EmptySegments: return "EmptySegments";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::NoHistoryForConcept: return "NoHistoryForConcept";
    case ErrorCode::UnsortedInput: return "UnsortedInput";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidFormat: return "InvalidFormat";
  }
  return "Unknown";
}

inline void require_dims(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::DimensionMismatch, what);
}

}  // namespace driftkan
