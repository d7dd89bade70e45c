#pragma once

#include <stdexcept>
#include <string>

namespace gmt {

/// Precondition violated by a caller-supplied argument.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation requested on a phase family that does not support it (e.g. derivatives of max-norm).
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Distance-type phase evaluated where its derivatives blow up (x == y).
class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// No sample of a level set could be found inside the box.
class EmptyLevelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Least-squares fit is degenerate or under-determined.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two rasters or densities live on different grids.
class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace gmt
