#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace nonmark {

/// Base class for every numerical failure raised by the library.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive refinement ran out of budget. Carries the best estimate so far.
class NonConvergence : public NumericalError {
 public:
  NonConvergence(const std::string& what, std::complex<double> best, double error_bound)
      : NumericalError(what), best_(best), error_bound_(error_bound) {}

  std::complex<double> best_estimate() const noexcept { return best_; }
  double error_bound() const noexcept { return error_bound_; }

 private:
  std::complex<double> best_;
  double error_bound_;
};

class NonFinite : public NumericalError {
 public:
  NonFinite(const std::string& what, double where) : NumericalError(what), where_(where) {}
  double where() const noexcept { return where_; }

 private:
  double where_;
};

/// The integral outside [-W, W] cannot be modelled and is too large to ignore.
class TailDominates : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class PVFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DerivativeUnstable : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DivisionNearZero : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ZeroNorm : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class UnstableStep : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace nonmark
