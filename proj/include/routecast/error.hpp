#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace routecast {

// Every failure the engine raises carries one of these codes so callers
// (and the filter trace) can report a stable reason string.
enum class ErrorCode {
  // route structure
  InvalidToken,
  EmptyReactants,
  DuplicateProduct,
  OrphanStep,
  Cycle,
  MissingTargetStep,
  SharedIntermediate,
  TargetMismatch,
  // adapters
  SyntaxError,
  SchemaError,
  ValidationError,
  UnsupportedEmitter,
  UnknownAdapter,
  // stock / io
  IoError,
  EmptyStock,
  MissingFile,
  // mgt
  TooManyPruningPoints,
  NotAnAntichain,
  InvalidPruningPoint,
  // statistics
  EmptyOutcomes,
  LengthMismatch,
  DegenerateInput,
  // benchmark
  InsufficientPool,
  InvalidStrataSpec,
  BenchmarkVerificationFailed,
  BenchmarkPredictionMismatch,
  // generic malformed artifact
  InvalidArtifact,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

// Adapter failures keep the source location (1-based line and column;
// zero when the location is not known).
class ParseError : public Error {
public:
  ParseError(ErrorCode code, const std::string &message, std::size_t line = 0,
             std::size_t column = 0);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

  // Validation error that wraps a route structure error.
  ErrorCode route_code() const noexcept { return route_code_; }
  ParseError &with_route_code(ErrorCode c) {
    route_code_ = c;
    return *this;
  }

private:
  std::size_t line_;
  std::size_t column_;
  ErrorCode route_code_ = ErrorCode::ValidationError;
};

} // namespace routecast
