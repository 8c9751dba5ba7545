#pragma once

#include <stdexcept>
#include <string>

namespace plap {

/// Invalid domain specification or mesh request.
class InvalidSpec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exponent/parameter triple outside its admissible range.
class InvalidParams : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the validity range of a stated estimate.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Numerical failure (zero input where a nonzero field is required,
/// bisection bracket failure, degenerate fit).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Config file could not be parsed or failed validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// CSV input does not match the expected schema.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace plap
