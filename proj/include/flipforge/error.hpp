#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace flipforge {

enum class ErrorCode {
  // usage / configuration
  InvalidConfig,
  // data
  MissingDirectory,
  NoFrames,
  NonContiguousFrames,
  MixedDimensions,
  UnsupportedBitDepth,
  EmptySequence,
  MalformedAnnotations,
  NegativeCoordinate,
  DuplicateEvent,
  BadMagic,
  UnsupportedVersion,
  SizeMismatch,
  OutOfBounds,
  EmptyBank,
  InvalidArgument,
  // io
  Io,
};

// Coarse grouping used by the CLI to pick an exit code.
enum class ErrorKind { Usage, Data, Io };

std::string_view to_string(ErrorCode code);
ErrorKind kind_of(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorKind kind() const noexcept { return kind_of(code_); }

private:
  ErrorCode code_;
};

} // namespace flipforge
