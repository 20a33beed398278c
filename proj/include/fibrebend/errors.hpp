#pragma once

#include <stdexcept>
#include <string>

namespace fibrebend {

/// Raised when inputs violate a documented invariant (bad dimensions,
/// malformed files, unknown keys). The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a well-formed computation cannot complete (bracket
/// failure, non-convergence).
class SolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fibrebend
