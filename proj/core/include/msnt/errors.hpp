#pragma once

#include <stdexcept>
#include <string>

namespace msnt {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A physical or structural assumption on the input data does not hold.
class ValidationError : public Error {
 public:
  ValidationError(std::string assumption, const std::string& what)
      : Error(assumption.empty() ? what : "(" + assumption + ") " + what),
        assumption_(std::move(assumption)) {}

  const std::string& assumption() const noexcept { return assumption_; }

 private:
  std::string assumption_;
};

/// Malformed configuration text.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Scalar root-finding did not converge (usually exp overflow in the inputs).
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Dense LU pivot fell below the singularity threshold.
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// Newton failed even after all time-step halvings.
class StepFailed : public Error {
 public:
  StepFailed(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

}  // namespace msnt
