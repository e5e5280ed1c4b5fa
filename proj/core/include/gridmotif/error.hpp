#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gridmotif {

enum class ErrorCode {
  InvalidEdge,
  SelfLoop,
  EmptySet,
  UnknownNode,
  MissingBlock,
  MalformedRow,
  UnknownBus,
  SchemaError,
  ParseError,
  TooSmall,
  RetryExhausted,
  DimMismatch,
  NonFiniteLoss,
  DegenerateSplit,
  EmptyReference,
  VersionMismatch,
  CorruptPayload,
  EmptyGraph,
  Timeout,
  TooLarge,
  DegenerateVariance,
  InvalidArgument,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code. Every failure raised by the
/// library is an Error; callers switch on code() rather than the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gridmotif
