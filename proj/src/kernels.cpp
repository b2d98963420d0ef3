#include <atomic>

#include "gcattack/error.hpp"
#include "gcattack/kernels.hpp"

namespace gcattack::kernels {

namespace {

std::atomic<bool> g_force_scalar{false};

void require_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": length " + std::to_string(a) +
                                              " vs " + std::to_string(b));
  }
}

}  // namespace

std::string_view to_string(Backend b) { return b == Backend::Avx2 ? "avx2" : "scalar"; }

bool avx2_supported() noexcept {
#if defined(GCATTACK_HAS_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported;
#else
  return false;
#endif
}

Backend active_backend() noexcept {
  if (g_force_scalar.load(std::memory_order_relaxed)) return Backend::Scalar;
  return avx2_supported() ? Backend::Avx2 : Backend::Scalar;
}

void force_scalar(bool on) noexcept { g_force_scalar.store(on, std::memory_order_relaxed); }

double dot(std::span<const double> a, std::span<const double> b) {
  require_same(a.size(), b.size(), "dot");
#if defined(GCATTACK_HAS_AVX2_KERNELS)
  if (active_backend() == Backend::Avx2) return avx2::dot(a.data(), b.data(), a.size());
#endif
  return scalar::dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_same(x.size(), y.size(), "axpy");
#if defined(GCATTACK_HAS_AVX2_KERNELS)
  if (active_backend() == Backend::Avx2) return avx2::axpy(alpha, x.data(), y.data(), x.size());
#endif
  scalar::axpy(alpha, x.data(), y.data(), x.size());
}

void sign_step_project(std::span<double> e, std::span<const double> g, double step, double radius) {
  require_same(e.size(), g.size(), "sign_step_project");
#if defined(GCATTACK_HAS_AVX2_KERNELS)
  if (active_backend() == Backend::Avx2) {
    return avx2::sign_step_project(e.data(), g.data(), e.size(), step, radius);
  }
#endif
  scalar::sign_step_project(e.data(), g.data(), e.size(), step, radius);
}

void gemv(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> x,
          std::span<const double> b, std::span<double> y) {
  require_same(w.size(), rows * cols, "gemv weights");
  require_same(x.size(), cols, "gemv input");
  require_same(b.size(), rows, "gemv bias");
  require_same(y.size(), rows, "gemv output");
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot(w.subspan(r * cols, cols), x) + b[r];
}

void gemv_transposed_accumulate(std::span<const double> w, std::size_t rows, std::size_t cols,
                                std::span<const double> g, std::span<double> out) {
  require_same(w.size(), rows * cols, "gemv_t weights");
  require_same(g.size(), rows, "gemv_t input");
  require_same(out.size(), cols, "gemv_t output");
  for (std::size_t r = 0; r < rows; ++r) {
    if (g[r] != 0.0) axpy(g[r], w.subspan(r * cols, cols), out);
  }
}

}  // namespace gcattack::kernels
