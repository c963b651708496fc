#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace detlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (t <= 0, zero
/// eigenvalue passed to an eta computation, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A determinant or zeta computation was asked for an operator with kernel.
class InvertibilityError : public Error {
 public:
  using Error::Error;
};

/// Evaluation at a pole of a meromorphic continuation.
class PoleError : public Error {
 public:
  PoleError(const std::string& what, double residue)
      : Error(what), residue_(residue) {}
  double residue() const noexcept { return residue_; }

 private:
  double residue_;
};

/// Quadrature or series did not reach the requested tolerance.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Root bracketing failed; carries the unresolved interval.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double lo, double hi)
      : Error(what), interval_(lo, hi) {}
  std::pair<double, double> interval() const noexcept { return interval_; }

 private:
  std::pair<double, double> interval_;
};

/// Small-time least-squares fit was ill-conditioned.
class FitError : public Error {
 public:
  FitError(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

/// Malformed configuration or unknown experiment.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace detlab
