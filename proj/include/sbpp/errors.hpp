#pragma once

#include <stdexcept>
#include <string>

namespace sbpp {

/// Invalid input: out-of-range parameters, malformed files, bad configs.
/// The CLI maps this to exit status 2.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not deliver its postcondition.
/// The CLI maps this (and subclasses) to exit status 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IntegrationFailure : public NumericalError {
 public:
  IntegrationFailure(const std::string& what, double r, double u, double du)
      : NumericalError(what), r_(r), u_(u), du_(du) {}
  double r() const { return r_; }
  double u() const { return u_; }
  double du() const { return du_; }

 private:
  double r_, u_, du_;
};

class BracketError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// t_u is undefined when the positive part of u vanishes.
class ProjectionUndefined : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class BarycenterUndefined : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConsistencyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace sbpp
