#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ocrom {

/// Base of every error raised by the library. The CLI maps subclasses onto
/// exit codes (config: 2, solver: 3, I/O: 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public SolverError {
 public:
  using SolverError::SolverError;
};

class NotSymmetric : public SolverError {
 public:
  using SolverError::SolverError;
};

class ConvergenceFailure : public SolverError {
 public:
  using SolverError::SolverError;
};

class SolverFailure : public SolverError {
 public:
  using SolverError::SolverError;
};

class NewtonDiverged : public SolverError {
 public:
  using SolverError::SolverError;
};

class AllSnapshotsFailed : public SolverError {
 public:
  using SolverError::SolverError;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

class NonIntersectingBranches : public Error {
 public:
  using Error::Error;
};

class UnknownTag : public Error {
 public:
  using Error::Error;
};

class ParameterOutOfDomain : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class MissingArtifact : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace ocrom
