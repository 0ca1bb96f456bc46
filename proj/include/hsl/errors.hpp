#pragma once

#include <stdexcept>
#include <string>

namespace hsl {

/// Raised when inputs fall outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  enum class Reason {
    NoPositiveHarmonics,  // mu > 1/4
    ParameterOutOfRange,
    MuZero,
    MuQuarter,
    RegimeNonexistent,  // mu <= -mu_star for the nonlinear / regular regimes
    Precondition,
  };

  DomainError(Reason reason, const std::string& what)
      : std::domain_error(what), reason_(reason) {}

  Reason reason() const noexcept { return reason_; }

 private:
  Reason reason_;
};

/// An iterative method did not converge or a certificate failed.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last = 0.0,
                   double previous = 0.0)
      : std::runtime_error(what), last_(last), previous_(previous) {}

  // Last two iterate distances (or residual measurements) at failure.
  double last() const noexcept { return last_; }
  double previous() const noexcept { return previous_; }

 private:
  double last_;
  double previous_;
};

/// Automatic parameter search for a barrier or splice ran out of steps.
class ConstructionError : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

/// Input data (tables, windows) cannot support the requested analysis.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hsl
