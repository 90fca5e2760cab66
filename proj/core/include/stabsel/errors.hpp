#pragma once

#include <stdexcept>
#include <string>

namespace stabsel {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A required column is missing, or a header is malformed.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A cell could not be parsed (non-numeric feature value, bad label, ...).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Data violates a domain invariant (see validate_table).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Caller passed arguments that break an operation precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Configuration file problems.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace stabsel
