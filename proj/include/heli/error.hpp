#pragma once

#include <stdexcept>
#include <string>

namespace heli {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration, matrix or scenario file.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A parameter set violates one of its invariants; the message names it.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Euler-rate matrix evaluated too close to pitch = +-90 deg.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver (rotor inflow, trim, Riccati) failed to converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// The integrated state became non-finite.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// No stabilizing game-Riccati solution exists at the requested attenuation.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Prescribed-performance envelope left, or tanh^-1 argument outside (-1, 1).
class EnvelopeViolation : public Error {
 public:
  EnvelopeViolation(const std::string& what, int axis, double margin)
      : Error(what), axis_(axis), margin_(margin) {}
  int axis() const { return axis_; }
  double margin() const { return margin_; }

 private:
  int axis_;
  double margin_;
};

}  // namespace heli
