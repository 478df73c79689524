#pragma once

#include <stdexcept>
#include <string>

namespace dhj {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A parameter violates one of the model invariants (q > p > 2, eps window, ...).
struct RangeError : Error {
  using Error::Error;
};

/// An evaluation was requested outside the admissible domain (x outside [0,1], |u| > K, ...).
struct DomainError : Error {
  using Error::Error;
};

/// Evaluation at a point where the profile is singular (x = 0 of the k = 0 profile).
struct SingularityError : Error {
  using Error::Error;
};

/// An iterative solve (root bracketing, time stepping) failed to reach its tolerance.
struct ConvergenceError : Error {
  using Error::Error;
};

/// The adaptive integrator exhausted its recursion budget before the tolerance.
struct QuadratureError : Error {
  using Error::Error;
};

/// A state or derived quantity stopped being finite.
struct NonFiniteError : Error {
  using Error::Error;
};

/// Malformed configuration file or inconsistent option set.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace dhj
