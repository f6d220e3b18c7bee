#pragma once

#include <stdexcept>
#include <string>

namespace autosen {

/// Precondition violated by caller-supplied values (bad sizes, ranges, labels).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Tensor shapes that do not line up for the requested operation.
class ShapeError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// NaN or Inf produced during a numerical computation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation called in the wrong lifecycle state (e.g. backward before forward).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed, truncated or version-mismatched binary or text file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace autosen
