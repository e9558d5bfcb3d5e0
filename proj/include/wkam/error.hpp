#pragma once

#include <stdexcept>
#include <string>

namespace wkam {

/// Base of every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user configuration: unknown family, out-of-range parameter, bad flag.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure did not reach its tolerance.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// An operation was called with inputs violating its precondition.
class PreconditionError : public Error {
 public:
  PreconditionError(const std::string& what, double defect = 0.0)
      : Error(what), defect_(defect) {}
  double defect() const noexcept { return defect_; }

 private:
  double defect_;
};

class NoOrbitError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateOrbitError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class InvalidSubsolutionError : public Error {
 public:
  InvalidSubsolutionError(const std::string& what, double x, double v, double t,
                          double value)
      : Error(what), x_(x), v_(v), t_(t), value_(value) {}
  double x() const noexcept { return x_; }
  double v() const noexcept { return v_; }
  double t() const noexcept { return t_; }
  double value() const noexcept { return value_; }

 private:
  double x_, v_, t_, value_;
};

}  // namespace wkam
