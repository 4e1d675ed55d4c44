#pragma once

#include <stdexcept>
#include <string>

namespace gbmred {

/// Shapes of the operands do not fit together.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An argument lies outside the domain where the operation is defined
/// (negative rate, indefinite matrix, epsilon beyond a critical value, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative method did not converge or a numerical check failed.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear system without a unique solution.
class SingularSystemError : public NumericalError {
 public:
  SingularSystemError(const std::string& what, int rank, int dimension)
      : NumericalError(what), rank_(rank), dimension_(dimension) {}

  int rank() const noexcept { return rank_; }
  int nullity() const noexcept { return dimension_ - rank_; }

 private:
  int rank_;
  int dimension_;
};

/// A parameter lies past a critical value; carries that value.
class CriticalParameterError : public DomainError {
 public:
  CriticalParameterError(const std::string& what, double critical) : DomainError(what), critical_(critical) {}

  double critical() const noexcept { return critical_; }

 private:
  double critical_;
};

/// Continuation lost track of a solution branch; carries the last parameter
/// value at which the branch was still resolved.
class BranchLostError : public DomainError {
 public:
  BranchLostError(const std::string& what, double last_good) : DomainError(what), last_good_(last_good) {}

  double last_good() const noexcept { return last_good_; }

 private:
  double last_good_;
};

}  // namespace gbmred
