#pragma once

#include <cstddef>

namespace nightspec::kernels {

// Data-parallel inner loops behind the spectral and imaging math.
//
// Every kernel pins an exact floating-point evaluation order so all
// backends produce bit-identical results and a run's outputs do not depend
// on which backend the dispatcher picked:
//
//  * element-wise kernels (axpy, scale, add, mul) perform one scalar op per
//    element; axpy uses a fused multiply-add per element.
//  * reductions (dot, sum, sum_sq_diff) accumulate the n & ~3 prefix into
//    four interleaved partial sums (lane j takes indices i with i % 4 == j,
//    dot/sum_sq_diff via fused multiply-add), combine them as
//    (s0 + s2) + (s1 + s3), then fold the <= 3 tail elements into a separate
//    sequential accumulator that is added last.
//
// The AVX2 backend is the same computation four lanes at a time.
struct Kernels {
  // dst[i] = fma(src[i], a, dst[i])
  void (*axpy)(double* dst, const double* src, double a, std::size_t n);
  // dst[i] = src[i] * a
  void (*scale)(double* dst, const double* src, double a, std::size_t n);
  // dst[i] += src[i]
  void (*add)(double* dst, const double* src, std::size_t n);
  // dst[i] = a[i] * b[i]
  void (*mul)(double* dst, const double* a, const double* b, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);
  const char* name;
};

const Kernels& scalar_kernels();

// AVX2+FMA backend, or nullptr when the build or the CPU lacks it.
const Kernels* avx2_kernels();

// Backend selected at first use: the NIGHTSPEC_KERNELS environment variable
// ("scalar", "avx2", "auto") when set, otherwise the best the CPU supports.
const Kernels& active();

}  // namespace nightspec::kernels
