#include "gcattack/kernels.hpp"

namespace gcattack::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void sign_step_project(double* e, const double* g, std::size_t n, double step, double radius) noexcept {
  for (std::size_t i = 0; i < n; ++i) {
    double v = e[i];
    if (g[i] > 0.0) {
      v += step;
    } else if (g[i] < 0.0) {
      v -= step;
    }
    // Same operand order as maxpd/minpd, so signed zeros match the vector path.
    v = v > -radius ? v : -radius;
    e[i] = v < radius ? v : radius;
  }
}

}  // namespace gcattack::kernels::scalar
