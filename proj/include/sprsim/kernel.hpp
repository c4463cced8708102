#pragma once

#include <numbers>

namespace sprsim {

/// Cubic-spline (M4) smoothing kernel with compact support 2h.
struct KernelSpec {
  int dim = 3;

  /// Normalization constant of w(q) in `dim` dimensions.
  double sigma() const {
    return dim == 3 ? 1.0 / std::numbers::pi : 10.0 / (7.0 * std::numbers::pi);
  }
  double norm(double h) const { return sigma() / (dim == 3 ? h * h * h : h * h); }
};

inline double spline_shape(double q) {
  if (q < 1.0) return 1.0 - 1.5 * q * q + 0.75 * q * q * q;
  if (q < 2.0) {
    double t = 2.0 - q;
    return 0.25 * t * t * t;
  }
  return 0.0;
}

/// dw/dq of spline_shape.
inline double spline_slope(double q) {
  if (q < 1.0) return -3.0 * q + 2.25 * q * q;
  if (q < 2.0) {
    double t = 2.0 - q;
    return -0.75 * t * t;
  }
  return 0.0;
}

/// W(r, h) = sigma_d / h^d * w(r / h).
inline double kernel_value(const KernelSpec& k, double r, double h) {
  return k.norm(h) * spline_shape(r / h);
}

/// dW/dr at (r, h).
inline double kernel_derivative(const KernelSpec& k, double r, double h) {
  return k.norm(h) / h * spline_slope(r / h);
}

}  // namespace sprsim
