#pragma once

#include <stdexcept>
#include <string>

namespace rdm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A value object failed its structural invariants (margins, ordering, sizes).
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// The requested (model, operation) or (model, measure) pair is not available.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Tied observations under the strict tie policy, or degenerate (constant) data.
class TieError : public Error {
 public:
  using Error::Error;
};

/// Malformed user configuration (CLI flags, model strings, measure strings).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or insufficient input data.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace rdm
