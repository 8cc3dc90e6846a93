#include "routecast/error.hpp"

namespace routecast {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
  case ErrorCode::InvalidToken: return "InvalidToken";
  case ErrorCode::EmptyReactants: return "EmptyReactants";
  case ErrorCode::DuplicateProduct: return "DuplicateProduct";
  case ErrorCode::OrphanStep: return "OrphanStep";
  case ErrorCode::Cycle: return "Cycle";
  case ErrorCode::MissingTargetStep: return "MissingTargetStep";
  case ErrorCode::SharedIntermediate: return "SharedIntermediate";
  case ErrorCode::TargetMismatch: return "TargetMismatch";
  case ErrorCode::SyntaxError: return "SyntaxError";
  case ErrorCode::SchemaError: return "SchemaError";
  case ErrorCode::ValidationError: return "ValidationError";
  case ErrorCode::UnsupportedEmitter: return "UnsupportedEmitter";
  case ErrorCode::UnknownAdapter: return "UnknownAdapter";
  case ErrorCode::IoError: return "IoError";
  case ErrorCode::EmptyStock: return "EmptyStock";
  case ErrorCode::MissingFile: return "MissingFile";
  case ErrorCode::TooManyPruningPoints: return "TooManyPruningPoints";
  case ErrorCode::NotAnAntichain: return "NotAnAntichain";
  case ErrorCode::InvalidPruningPoint: return "InvalidPruningPoint";
  case ErrorCode::EmptyOutcomes: return "EmptyOutcomes";
  case ErrorCode::LengthMismatch: return "LengthMismatch";
  case ErrorCode::DegenerateInput: return "DegenerateInput";
  case ErrorCode::InsufficientPool: return "InsufficientPool";
  case ErrorCode::InvalidStrataSpec: return "InvalidStrataSpec";
  case ErrorCode::BenchmarkVerificationFailed:
    return "BenchmarkVerificationFailed";
  case ErrorCode::BenchmarkPredictionMismatch:
    return "BenchmarkPredictionMismatch";
  case ErrorCode::InvalidArtifact: return "InvalidArtifact";
  }
  return "Unknown";
}

ParseError::ParseError(ErrorCode code, const std::string &message,
                       std::size_t line, std::size_t column)
    : Error(code,
            line == 0 ? message
                      : message + " (line " + std::to_string(line) +
                            ", column " + std::to_string(column) + ")"),
      line_(line), column_(column) {}

} // namespace routecast
