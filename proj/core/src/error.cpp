#include "gridmotif/error.hpp"

namespace gridmotif {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidEdge: return "InvalidEdge";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::MissingBlock: return "MissingBlock";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::UnknownBus: return "UnknownBus";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::RetryExhausted: return "RetryExhausted";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::EmptyReference: return "EmptyReference";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptPayload: return "CorruptPayload";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace gridmotif
