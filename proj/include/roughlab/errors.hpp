#pragma once

#include <stdexcept>
#include <string>

namespace roughlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A cylinder or radius is too small for the sampling grid.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// Exterior data grows too fast for the weighted integrals to converge.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class EstimationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Explicit step larger than the monotonicity bound.
class CflViolation : public Error {
 public:
  using Error::Error;
};

/// Non-finite value produced during time stepping.
class NumericalAbort : public Error {
 public:
  NumericalAbort(const std::string& what, double x, double t)
      : Error(what), x_(x), t_(t) {}
  double x() const noexcept { return x_; }
  double t() const noexcept { return t_; }

 private:
  double x_;
  double t_;
};

}  // namespace roughlab
