#pragma once

#include <stdexcept>
#include <string>

namespace k3 {

/// Bad parameters or malformed input (maps to CLI exit code 2).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Arithmetic between elements or subspaces that live over different fields
/// or in different ambient spaces.
class FieldMismatch : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// A desk-scale complexity guard tripped (maps to CLI exit code 3).
class GuardExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A structural expectation failed at runtime (maps to CLI exit code 4).
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace k3
