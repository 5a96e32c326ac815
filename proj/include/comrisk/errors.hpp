#pragma once

#include <stdexcept>
#include <string>

namespace comrisk {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A forward value or gradient became NaN/Inf, or an operation is undefined
/// on its input (empty normalization set, empty batch).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data. Carries the file/line when known.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (unknown keys, out-of-range values).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace comrisk
