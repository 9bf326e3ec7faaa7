#pragma once

#include <stdexcept>
#include <string>

namespace gridplan {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Problems with user-provided input. The CLI maps these to exit code 1.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Failures inside the LP/MILP machinery. The CLI maps these to exit code 2.
class SolverError : public Error {
 public:
  using Error::Error;
};

class ParseError : public InputError {
 public:
  using InputError::InputError;
};

class ValidationError : public InputError {
 public:
  using InputError::InputError;
};

class MissingRisk : public InputError {
 public:
  explicit MissingRisk(int line_id)
      : InputError("no risk value for line " + std::to_string(line_id)), line_id_(line_id) {}
  int line_id() const noexcept { return line_id_; }

 private:
  int line_id_;
};

class UnknownEntity : public InputError {
 public:
  using InputError::InputError;
};

class DimensionMismatch : public InputError {
 public:
  using InputError::InputError;
};

class FormulationError : public InputError {
 public:
  using InputError::InputError;
};

class MissingCoordinates : public InputError {
 public:
  using InputError::InputError;
};

class ExtractionError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Wraps a solver failure with the Benders iteration / scenario it happened in.
class SolverFailure : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace gridplan
