#pragma once

#include <stdexcept>
#include <string>

namespace lindexp {

// Every failure raised by the library derives from Error; the category is
// what the CLI maps onto its exit code.
enum class ErrorCategory {
  Dimension = 2,
  Numeric = 3,
  Singular = 4,
  Degenerate = 5,
  Parameter = 6,
  SizeGuard = 7,
  Config = 8,
  Io = 9,
  Gate = 10,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what)
      : Error(ErrorCategory::Dimension, what) {}
};

class NumericOverflowError : public Error {
 public:
  explicit NumericOverflowError(const std::string& what)
      : Error(ErrorCategory::Numeric, what) {}
};

class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what)
      : Error(ErrorCategory::Numeric, what) {}
};

class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, int row, int col)
      : Error(ErrorCategory::Singular, what), row_(row), col_(col) {}
  // Indices of the offending eigenvalue pair (lambda_row + conj(lambda_col)).
  int row() const noexcept { return row_; }
  int col() const noexcept { return col_; }

 private:
  int row_;
  int col_;
};

class DegenerateInputError : public Error {
 public:
  explicit DegenerateInputError(const std::string& what)
      : Error(ErrorCategory::Degenerate, what) {}
};

class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what)
      : Error(ErrorCategory::Parameter, what) {}
};

class SizeGuardError : public Error {
 public:
  explicit SizeGuardError(const std::string& what)
      : Error(ErrorCategory::SizeGuard, what) {}
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(ErrorCategory::Config, field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::Io, what) {}
};

// Post-run invariant gate (positivity / trace) failed.
class GateError : public Error {
 public:
  explicit GateError(const std::string& what)
      : Error(ErrorCategory::Gate, what) {}
};

// Wraps a failure raised while advancing step `step` of an integration.
class StepError : public Error {
 public:
  StepError(const Error& cause, long step)
      : Error(cause.category(),
              "step " + std::to_string(step) + ": " + cause.what()),
        step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

}  // namespace lindexp
