#pragma once

#include <stdexcept>
#include <string>

namespace mgeof {

// Malformed matrices (wrong shape, not symmetric, not symplectic).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Well-formed input outside the domain of the operation, e.g. a mixed state
// handed to a pure-state measure or an unphysical covariance matrix.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class UnphysicalStateError : public DomainError {
 public:
  UnphysicalStateError(const std::string& what, double worst_nu)
      : DomainError(what), worst_nu_(worst_nu) {}
  double worst_nu() const noexcept { return worst_nu_; }

 private:
  double worst_nu_;
};

class UnsupportedSizeError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Iterative numerics (root-finders, decompositions) that did not converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or unreadable state files.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OptimizationFailure : public std::runtime_error {
 public:
  OptimizationFailure(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

}  // namespace mgeof
