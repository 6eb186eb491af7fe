#include "nightspec/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "nightspec/errors.hpp"

namespace nightspec::kernels {

namespace {

void axpy_scalar(double* dst, const double* src, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    dst[i] = std::fma(src[i], a, dst[i]);
  }
}

void scale_scalar(double* dst, const double* src, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    dst[i] = src[i] * a;
  }
}

void add_scalar(double* dst, const double* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    dst[i] += src[i];
  }
}

void mul_scalar(double* dst, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    dst[i] = a[i] * b[i];
  }
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    s0 = std::fma(a[i + 0], b[i + 0], s0);
    s1 = std::fma(a[i + 1], b[i + 1], s1);
    s2 = std::fma(a[i + 2], b[i + 2], s2);
    s3 = std::fma(a[i + 3], b[i + 3], s3);
  }
  double tail = 0.0;
  for (std::size_t i = n4; i < n; ++i) {
    tail = std::fma(a[i], b[i], tail);
  }
  return ((s0 + s2) + (s1 + s3)) + tail;
}

double sum_scalar(const double* a, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    s0 += a[i + 0];
    s1 += a[i + 1];
    s2 += a[i + 2];
    s3 += a[i + 3];
  }
  double tail = 0.0;
  for (std::size_t i = n4; i < n; ++i) {
    tail += a[i];
  }
  return ((s0 + s2) + (s1 + s3)) + tail;
}

double sum_sq_diff_scalar(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    const double d0 = a[i + 0] - b[i + 0];
    const double d1 = a[i + 1] - b[i + 1];
    const double d2 = a[i + 2] - b[i + 2];
    const double d3 = a[i + 3] - b[i + 3];
    s0 = std::fma(d0, d0, s0);
    s1 = std::fma(d1, d1, s1);
    s2 = std::fma(d2, d2, s2);
    s3 = std::fma(d3, d3, s3);
  }
  double tail = 0.0;
  for (std::size_t i = n4; i < n; ++i) {
    const double d = a[i] - b[i];
    tail = std::fma(d, d, tail);
  }
  return ((s0 + s2) + (s1 + s3)) + tail;
}

const Kernels kScalar = {
    axpy_scalar, scale_scalar, add_scalar,        mul_scalar,
    dot_scalar,  sum_scalar,   sum_sq_diff_scalar, "scalar",
};

const Kernels& pick_active() {
  const char* env = std::getenv("NIGHTSPEC_KERNELS");
  const std::string want = env ? env : "auto";
  if (want == "scalar") {
    return kScalar;
  }
  const Kernels* avx2 = avx2_kernels();
  if (want == "avx2") {
    if (avx2 == nullptr) {
      throw DomainError("NIGHTSPEC_KERNELS=avx2 but AVX2+FMA is unavailable");
    }
    return *avx2;
  }
  if (want != "auto") {
    throw DomainError("unknown NIGHTSPEC_KERNELS value: " + want);
  }
  return avx2 != nullptr ? *avx2 : kScalar;
}

}  // namespace

const Kernels& scalar_kernels() { return kScalar; }

const Kernels& active() {
  static const Kernels& chosen = pick_active();
  return chosen;
}

}  // namespace nightspec::kernels
