#pragma once

#include <stdexcept>
#include <string>

namespace survgroup {

// Base class for everything this library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data violates a domain constraint (bad event value, negative time, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A named column is missing or unknown.
class ColumnError : public Error {
 public:
  using Error::Error;
};

// A cell could not be parsed; the message carries file line and column name.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Mismatched lengths / dimensions between related containers.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A time grid that is not strictly ascending.
class GridError : public Error {
 public:
  using Error::Error;
};

// A scalar argument outside its domain (non-finite, non-positive horizon, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// An invalid configuration (forest/learner settings that cannot be satisfied).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// An estimate that cannot be formed at all (empty selection).
class EstimationError : public Error {
 public:
  using Error::Error;
};

// A selection that exists but has no usable signal (zero events, zero weight).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// A two-sample comparison against an empty group or empty complement.
class ComparisonError : public Error {
 public:
  using Error::Error;
};

// Synthetic data generation could not satisfy its own constraints.
class GenerationError : public Error {
 public:
  using Error::Error;
};

// File / cache I/O problems.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace survgroup
