#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pdsape {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line` is 1-based; 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A value outside its mathematical domain (outcome outside [0,1], q outside (0,1), ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Dimension mismatch or ragged input.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Two input files disagree with each other.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// The same cell specified twice.
class ConflictError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical failures. These map to CLI exit code 1.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double kkt_violation = 0.0)
      : NumericalError(what), kkt_violation_(kkt_violation) {}
  double kkt_violation() const noexcept { return kkt_violation_; }

 private:
  double kkt_violation_;
};

class SeparationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace pdsape
