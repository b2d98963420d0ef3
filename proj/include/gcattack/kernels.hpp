#pragma once

// Dense double-precision kernels used by the classifier forward/backward
// passes, training and the PGD update. Each kernel has a scalar reference in
// `scalar::` and an AVX2+FMA variant in `avx2::`; the unqualified entry points
// dispatch at runtime on CPU support. Reductions in the vector variants sum in
// a different order, so results agree with the reference to rounding, not
// bitwise; the sign-step/projection kernel is exact in both.

#include <cstddef>
#include <span>
#include <string_view>

namespace gcattack::kernels {

enum class Backend { Scalar, Avx2 };

std::string_view to_string(Backend b);

/// True when the running CPU supports AVX2 and FMA.
bool avx2_supported() noexcept;

/// Backend used by the dispatching entry points.
Backend active_backend() noexcept;

/// Pins the dispatching entry points to the scalar reference (true) or back to
/// the best supported backend (false).
void force_scalar(bool on) noexcept;

double dot(std::span<const double> a, std::span<const double> b);

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// e <- clamp(e + step * sign(g), -radius, radius), with sign(0) = 0.
void sign_step_project(std::span<double> e, std::span<const double> g, double step, double radius);

/// y = W x + b for row-major W (rows x cols).
void gemv(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> x,
          std::span<const double> b, std::span<double> y);

/// out += W^T g for row-major W (rows x cols).
void gemv_transposed_accumulate(std::span<const double> w, std::size_t rows, std::size_t cols,
                                std::span<const double> g, std::span<double> out);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
void sign_step_project(double* e, const double* g, std::size_t n, double step, double radius) noexcept;
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define GCATTACK_HAS_AVX2_KERNELS 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
void sign_step_project(double* e, const double* g, std::size_t n, double step, double radius) noexcept;
}  // namespace avx2
#endif

}  // namespace gcattack::kernels
