#include "nightspec/rng.hpp"

#include <cmath>

namespace nightspec {

namespace {

// Knuth-style inversion by multiplication. Fine for small means: the
// expected number of uniforms is mean + 1.
std::int64_t poisson_inversion(double mean, Stream& stream) {
  const double limit = std::exp(-mean);
  double prod = 1.0;
  std::int64_t k = -1;
  do {
    prod *= stream.next_unit();
    ++k;
  } while (prod > limit);
  return k;
}

// Hormann (1993), "The transformed rejection method for generating Poisson
// random variables", algorithm PTRS. Valid for mean >= 10.
std::int64_t poisson_ptrs(double mean, Stream& stream) {
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);

  for (;;) {
    const double u = stream.next_unit() - 0.5;
    const double v = stream.next_unit();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) {
      return static_cast<std::int64_t>(kf);
    }
    if (kf < 0.0 || (us < 0.013 && v > us)) {
      continue;
    }
    const double k = kf;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        k * loglam - mean - std::lgamma(k + 1.0)) {
      return static_cast<std::int64_t>(kf);
    }
  }
}

}  // namespace

std::int64_t poisson_sample(double mean, Stream& stream) {
  if (!(mean > 0.0)) {
    return 0;
  }
  if (mean < 10.0) {
    return poisson_inversion(mean, stream);
  }
  return poisson_ptrs(mean, stream);
}

double gaussian_sample(Stream& stream) {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - stream.next_unit();
  const double u2 = stream.next_unit();
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace nightspec
