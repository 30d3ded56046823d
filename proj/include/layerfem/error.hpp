#pragma once

#include <stdexcept>
#include <string>

namespace layerfem {

/// Raised when a caller passes parameters that violate a documented precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a stabilization parameter exceeds the coercivity bound mu0 / (2 |c|^2).
class StabilizationBoundError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Raised for geometrically invalid cells (nonpositive Jacobian determinant).
class DegenerateCell : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by numerical kernels (zero pivots, non-finite data).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace layerfem
