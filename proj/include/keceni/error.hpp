#pragma once

#include <stdexcept>
#include <string>

namespace keceni {

/// Malformed input data, configuration or arguments. Maps to CLI exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure (rank deficiency, non-convergence, empty kernel mass).
/// Maps to CLI exit code 1.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when no unit has positive kernel weight for a target configuration.
class EmptyKernelError : public NumericError {
 public:
  EmptyKernelError(const std::string& what, double min_delta)
      : NumericError(what), min_delta_(min_delta) {}

  /// Smallest dissimilarity among eligible units; widen the bandwidth past it.
  double min_delta() const { return min_delta_; }

 private:
  double min_delta_;
};

}  // namespace keceni
