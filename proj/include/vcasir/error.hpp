#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vcasir {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Errors caused by the caller's data or arguments (CLI exit code 1).
class InputError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public InputError {
 public:
  using InputError::InputError;
};

class ParameterError : public InputError {
 public:
  using InputError::InputError;
};

class IoError : public InputError {
 public:
  using InputError::InputError;
};

/// Unknown or unsupported file format.
class FormatError : public InputError {
 public:
  using InputError::InputError;
};

/// File recognised but its payload is truncated or malformed.
class DecodeError : public InputError {
 public:
  using InputError::InputError;
};

/// Structurally valid text with inconsistent content (model files, CSV).
class ParseError : public InputError {
 public:
  using InputError::InputError;
};

/// Non-finite or out-of-range sample values.
class DataError : public InputError {
 public:
  using InputError::InputError;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::size_t iterations, double gap)
      : Error(what), iterations_(iterations), gap_(gap) {}

  std::size_t iterations() const noexcept { return iterations_; }
  /// KKT violation gap at the last iterate.
  double gap() const noexcept { return gap_; }

 private:
  std::size_t iterations_;
  double gap_;
};

/// A correlation coefficient is undefined (zero variance); RMSE is still known.
class UndefinedCorrelationError : public InputError {
 public:
  UndefinedCorrelationError(const std::string& what, double rmse)
      : InputError(what), rmse_(rmse) {}

  double rmse() const noexcept { return rmse_; }

 private:
  double rmse_;
};

}  // namespace vcasir
