#pragma once

#include <cmath>

namespace sdfilter {

/// Gaussian weight exp(-x^2 / (2 s^2)).
inline double kernel_phi(double x, double s) { return std::exp(-(x * x) / (2.0 * s * s)); }

/// Robust penalty 1 - kernel_phi(x, s); zero at the origin and bounded by one.
inline double kernel_psi(double x, double s) { return 1.0 - kernel_phi(x, s); }

/// kernel_phi evaluated from a squared distance.
inline double kernel_phi_sq(double x_sq, double s) { return std::exp(-x_sq / (2.0 * s * s)); }

}  // namespace sdfilter
