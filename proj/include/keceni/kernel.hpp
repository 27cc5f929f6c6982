#pragma once

#include <string>
#include <string_view>

namespace keceni {

enum class KernelShape { triangular, box };

/// κ on [0, ∞): κ(0) = 1, nonincreasing, zero beyond 1.
inline double kernel_profile(KernelShape shape, double u) {
  if (u < 0.0) u = -u;
  switch (shape) {
    case KernelShape::triangular:
      return u < 1.0 ? 1.0 - u : 0.0;
    case KernelShape::box:
      return u <= 1.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

/// κ_λ(Δ) = κ(Δ / λ).
struct Kernel {
  KernelShape shape = KernelShape::triangular;
  double bandwidth = 1.0;

  double operator()(double delta) const { return kernel_profile(shape, delta / bandwidth); }
};

KernelShape parse_kernel_shape(std::string_view name);
std::string to_string(KernelShape shape);

}  // namespace keceni
