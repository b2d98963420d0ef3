#include "gcattack/kernels.hpp"

#if defined(GCATTACK_HAS_AVX2_KERNELS)

#include <immintrin.h>

namespace gcattack::kernels::avx2 {

__attribute__((target("avx2,fma"))) double dot(const double* a, const double* b, std::size_t n) noexcept {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  acc0 = _mm256_add_pd(acc0, acc1);
  __m128d lo = _mm256_castpd256_pd128(acc0);
  __m128d hi = _mm256_extractf128_pd(acc0, 1);
  lo = _mm_add_pd(lo, hi);
  lo = _mm_add_sd(lo, _mm_unpackhi_pd(lo, lo));
  double s = _mm_cvtsd_f64(lo);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

__attribute__((target("avx2,fma"))) void axpy(double alpha, const double* x, double* y,
                                              std::size_t n) noexcept {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// Selecting +step / -step / 0 by mask and adding keeps this bit-identical to
// the scalar reference.
__attribute__((target("avx2,fma"))) void sign_step_project(double* e, const double* g, std::size_t n,
                                                           double step, double radius) noexcept {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d up = _mm256_set1_pd(step);
  const __m256d down = _mm256_set1_pd(-step);
  const __m256d hi = _mm256_set1_pd(radius);
  const __m256d lo = _mm256_set1_pd(-radius);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vg = _mm256_loadu_pd(g + i);
    const __m256d pos = _mm256_cmp_pd(vg, zero, _CMP_GT_OQ);
    const __m256d neg = _mm256_cmp_pd(vg, zero, _CMP_LT_OQ);
    const __m256d delta = _mm256_or_pd(_mm256_and_pd(pos, up), _mm256_and_pd(neg, down));
    __m256d v = _mm256_add_pd(_mm256_loadu_pd(e + i), delta);
    v = _mm256_min_pd(_mm256_max_pd(v, lo), hi);
    _mm256_storeu_pd(e + i, v);
  }
  scalar::sign_step_project(e + i, g + i, n - i, step, radius);
}

}  // namespace gcattack::kernels::avx2

#endif
