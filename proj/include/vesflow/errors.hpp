#pragma once

#include <stdexcept>
#include <string>

namespace vesflow {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Right-hand side of a Neumann Poisson problem does not have zero mean.
class IncompatibleRhs : public Error {
 public:
  using Error::Error;
};

/// Sobolev order outside the supported range.
class UnsupportedOrder : public Error {
 public:
  using Error::Error;
};

/// A stepper produced NaN or Inf.
class NonFiniteState : public Error {
 public:
  using Error::Error;
};

/// Explicit viscous step exceeds its diffusion bound.
class CflViolation : public Error {
 public:
  using Error::Error;
};

/// A post-step invariant (mass, zero mean) drifted out of tolerance.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// Equilibrium iteration ran out of iterations.
class NotConverged : public Error {
 public:
  NotConverged(const std::string& what, long iterations, double residual)
      : Error(what), iterations_(iterations), residual_(residual) {}
  long iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  long iterations_;
  double residual_;
};

/// Not enough usable samples for a Lojasiewicz fit.
class InsufficientTail : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration document.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Configuration parsed but violates a constraint. `constraint()` names it,
/// e.g. "nu > 0".
class ValidationError : public Error {
 public:
  ValidationError(std::string constraint, const std::string& detail)
      : Error(constraint + ": " + detail), constraint_(std::move(constraint)) {}
  const std::string& constraint() const noexcept { return constraint_; }

 private:
  std::string constraint_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace vesflow
