#pragma once

#include <stdexcept>
#include <string>

namespace fluidspan {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidFieldError : public Error {
 public:
  using Error::Error;
};

/// Raised when Δ⁻¹ is asked to invert data with a nonzero mean.
class SolvabilityError : public Error {
 public:
  SolvabilityError(const std::string& what, double offending_mean)
      : Error(what), mean_(offending_mean) {}
  double offending_mean() const { return mean_; }

 private:
  double mean_;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class VacuumError : public Error {
 public:
  using Error::Error;
};

class InstabilityError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class TimeMismatchError : public Error {
 public:
  using Error::Error;
};

class ReconstructionError : public Error {
 public:
  using Error::Error;
};

/// A nested logarithm left its domain. `level` counts from the innermost log (1).
class DomainError : public Error {
 public:
  DomainError(const std::string& what, int level) : Error(what), level_(level) {}
  int level() const { return level_; }

 private:
  int level_;
};

/// A lemma hypothesis (e.g. C > e) does not hold.
class HypothesisError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fluidspan
