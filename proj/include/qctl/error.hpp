#pragma once

#include <stdexcept>
#include <string>

namespace qctl {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input failed validation: wrong shape, violated precondition, bad literal.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// An operator expected to be Hermitian / psd / invertible is not.
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A numerical procedure failed (blow-up, stagnation, near-singular solve).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Sylvester pencil with spectra of A and -B too close.
class NearSingularError : public NumericalError {
 public:
  NearSingularError(const std::string& what, double separation)
      : NumericalError(what), separation_(separation) {}
  double separation() const { return separation_; }

 private:
  double separation_;
};

/// A Riccati trajectory left the configured norm bound.
class BlowUpError : public NumericalError {
 public:
  BlowUpError(const std::string& what, double time) : NumericalError(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Step-halving moved an integrated trajectory by more than the tolerance.
class GridTooCoarseError : public NumericalError {
 public:
  GridTooCoarseError(const std::string& what, double delta)
      : NumericalError(what), delta_(delta) {}
  double delta() const { return delta_; }

 private:
  double delta_;
};

}  // namespace qctl
