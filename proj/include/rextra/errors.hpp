#pragma once

#include <stdexcept>
#include <string>

namespace rextra {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Operand shapes are incompatible with the requested operation.
struct DimensionMismatch : Error {
  using Error::Error;
};

/// A value passed to an operation lies outside its admissible range.
struct InvalidArgument : Error {
  using Error::Error;
};

/// Metric projection is not well defined: the smallest singular value of the
/// input is at or below the 1e-12 floor (or the input is non-finite).
struct SingularProjection : Error {
  using Error::Error;
};

/// A probe input lies outside the tube where the projection bound applies.
struct TubeViolation : Error {
  using Error::Error;
};

/// An iterate or intermediate quantity stopped being finite.
struct NonFiniteIterate : Error {
  using Error::Error;
};

/// The graph handed to a mixing-matrix construction is not connected.
struct Disconnected : Error {
  using Error::Error;
};

/// Random graph sampling failed to produce a connected graph within the
/// resample budget.
struct RetryExhausted : Error {
  using Error::Error;
};

/// Generated data is rank deficient where full rank is required.
struct RankDeficient : Error {
  using Error::Error;
};

/// A data split across agents does not divide evenly.
struct IndivisibleSplit : Error {
  using Error::Error;
};

/// An algorithm was started from an infeasible point.
struct InfeasibleStart : Error {
  using Error::Error;
};

/// A text input (matrix file, edge list) could not be parsed; the message
/// carries row/column context.
struct ParseError : Error {
  using Error::Error;
};

/// A binary or parsed input has inconsistent declared/actual dimensions.
struct ShapeError : Error {
  using Error::Error;
};

/// Filesystem-level failure (open, read, write).
struct IoError : Error {
  using Error::Error;
};

/// Configuration errors carry the offending line, key, and failure kind.
struct ConfigError : Error {
  enum class Kind { UnknownKey, TypeError, MissingKey, Conflict, BadValue };

  ConfigError(Kind k, int line_number, std::string key_name, const std::string& message)
      : Error(message), kind(k), line(line_number), key(std::move(key_name)) {}

  Kind kind;
  int line;  // 1-based; 0 when no single line is responsible
  std::string key;
};

}  // namespace rextra
