// AVX2 backend. Compiled with -mavx2 -mfma; only referenced after a runtime
// cpuid check, so the dispatcher must not call into this TU on older cores.
#include "nightspec/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstddef>

namespace nightspec::kernels {

namespace {

// Horizontal reduce matching ((s0+s2)+(s1+s3)): unpack pairs lanes {0,2} and
// {1,3} of the accumulator once the four running sums are interleaved.
double reduce4(__m256d acc) {
  const __m128d lo = _mm256_castpd256_pd128(acc);   // s0 s1
  const __m128d hi = _mm256_extractf128_pd(acc, 1); // s2 s3
  const __m128d sums = _mm_add_pd(lo, hi);          // s0+s2, s1+s3
  const __m128d swap = _mm_unpackhi_pd(sums, sums);
  return _mm_cvtsd_f64(_mm_add_sd(sums, swap));
}

void axpy_avx2(double* dst, const double* src, double a, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d s = _mm256_loadu_pd(src + i);
    const __m256d d = _mm256_loadu_pd(dst + i);
    _mm256_storeu_pd(dst + i, _mm256_fmadd_pd(s, va, d));
  }
  for (std::size_t i = n4; i < n; ++i) {
    dst[i] = std::fma(src[i], a, dst[i]);
  }
}

void scale_avx2(double* dst, const double* src, double a, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    _mm256_storeu_pd(dst + i, _mm256_mul_pd(_mm256_loadu_pd(src + i), va));
  }
  for (std::size_t i = n4; i < n; ++i) {
    dst[i] = src[i] * a;
  }
}

void add_avx2(double* dst, const double* src, std::size_t n) {
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(dst + i),
                                            _mm256_loadu_pd(src + i)));
  }
  for (std::size_t i = n4; i < n; ++i) {
    dst[i] += src[i];
  }
}

void mul_avx2(double* dst, const double* a, const double* b, std::size_t n) {
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    _mm256_storeu_pd(dst + i, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                            _mm256_loadu_pd(b + i)));
  }
  for (std::size_t i = n4; i < n; ++i) {
    dst[i] = a[i] * b[i];
  }
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  }
  double tail = 0.0;
  for (std::size_t i = n4; i < n; ++i) {
    tail = std::fma(a[i], b[i], tail);
  }
  return reduce4(acc) + tail;
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  }
  double tail = 0.0;
  for (std::size_t i = n4; i < n; ++i) {
    tail += a[i];
  }
  return reduce4(acc) + tail;
}

double sum_sq_diff_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d d =
        _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double tail = 0.0;
  for (std::size_t i = n4; i < n; ++i) {
    const double d = a[i] - b[i];
    tail = std::fma(d, d, tail);
  }
  return reduce4(acc) + tail;
}

const Kernels kAvx2 = {
    axpy_avx2, scale_avx2, add_avx2,         mul_avx2,
    dot_avx2,  sum_avx2,   sum_sq_diff_avx2, "avx2",
};

}  // namespace

const Kernels* avx2_kernels() {
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return &kAvx2;
  }
  return nullptr;
}

}  // namespace nightspec::kernels

#else

namespace nightspec::kernels {

const Kernels* avx2_kernels() { return nullptr; }

}  // namespace nightspec::kernels

#endif
