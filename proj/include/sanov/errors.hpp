#pragma once

#include <stdexcept>
#include <string>

namespace sanov {

/// Malformed or out-of-domain input (bad index, invalid distribution, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A dense tensor over E^n would exceed the configured memory cap.
/// Symmetric (type-class) representations avoid this for large n.
class CapacityError : public InputError {
 public:
  using InputError::InputError;
};

/// An iterative method failed to reach its stopping criterion.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A statistical experiment cannot support a conclusion (too few replications or hits).
class InconclusiveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sanov
