#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace abphase {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A field or potential was evaluated on its singular set (tube center,
/// Dirac string, a path through the reference point).
class SingularityError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Numerical result missed its acceptance tolerance. `residual` is the
/// error estimate that failed.
class ToleranceError : public Error {
 public:
  ToleranceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// An improper integral whose tail does not decay fast enough to converge
/// absolutely (e.g. a gauge function growing at infinity).
class DivergentTailError : public ToleranceError {
 public:
  using ToleranceError::ToleranceError;
};

/// Raised by the integrator when the energy drift exceeds its threshold.
class InstabilityError : public ToleranceError {
 public:
  using ToleranceError::ToleranceError;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what), line_(line), column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace abphase
