#include "flipforge/error.hpp"

namespace flipforge {

std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::InvalidConfig: return "invalid-config";
  case ErrorCode::MissingDirectory: return "missing-directory";
  case ErrorCode::NoFrames: return "no-frames";
  case ErrorCode::NonContiguousFrames: return "non-contiguous-frames";
  case ErrorCode::MixedDimensions: return "mixed-dimensions";
  case ErrorCode::UnsupportedBitDepth: return "unsupported-bit-depth";
  case ErrorCode::EmptySequence: return "empty-sequence";
  case ErrorCode::MalformedAnnotations: return "malformed-annotations";
  case ErrorCode::NegativeCoordinate: return "negative-coordinate";
  case ErrorCode::DuplicateEvent: return "duplicate-event";
  case ErrorCode::BadMagic: return "bad-magic";
  case ErrorCode::UnsupportedVersion: return "unsupported-version";
  case ErrorCode::SizeMismatch: return "size-mismatch";
  case ErrorCode::OutOfBounds: return "out-of-bounds";
  case ErrorCode::EmptyBank: return "empty-bank";
  case ErrorCode::InvalidArgument: return "invalid-argument";
  case ErrorCode::Io: return "io";
  }
  return "unknown";
}

ErrorKind kind_of(ErrorCode code) {
  switch (code) {
  case ErrorCode::InvalidConfig:
    return ErrorKind::Usage;
  case ErrorCode::Io:
  case ErrorCode::MissingDirectory:
    return ErrorKind::Io;
  default:
    return ErrorKind::Data;
  }
}

} // namespace flipforge
