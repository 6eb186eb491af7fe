#pragma once

#include <array>
#include <cstddef>

#include "nightspec/imaging.hpp"

namespace nightspec {

// Per-pixel affine map: [vis R,G,B, nir R,G,B, 1] -> [R,G,B]. Stands in for
// a learned restoration network; being closed-form, the spectrum objective
// built on top of it is exactly computable.
struct LinearReconstructor {
  std::array<double, 21> m{};  // row-major 3 x 7
  double ridge = 0.0;

  double at(std::size_t row, std::size_t col) const { return m[row * 7 + col]; }
};

// Accumulates the normal-equation sums A = sum u u^T and B = sum y u^T over
// pixels of (vis, nir, target) triples. Kept public so callers that need to
// differentiate through the fit can read the raw sums.
class FitAccumulator {
 public:
  void add(const RgbImage& vis, const RgbImage& nir, const RgbImage& target);

  // Minimizes sum ||M u - y||^2 + ridge ||M||_F^2. Unique for ridge > 0;
  // with ridge = 0 a rank-deficient A raises RankError.
  LinearReconstructor solve(double ridge) const;

  const std::array<double, 49>& uu() const { return uu_; }  // A, row-major 7x7
  const std::array<double, 21>& yu() const { return yu_; }  // B, row-major 3x7
  std::size_t samples() const { return count_; }

 private:
  std::array<double, 49> uu_{};
  std::array<double, 21> yu_{};
  std::size_t count_ = 0;
};

LinearReconstructor fit_reconstructor(const RgbImage& vis, const RgbImage& nir,
                                      const RgbImage& target, double ridge);

RgbImage apply_reconstructor(const LinearReconstructor& model,
                             const RgbImage& vis, const RgbImage& nir);

// Mean over all 3 * W * H elements.
double mse_loss(const RgbImage& x, const RgbImage& y);

// 10 log10(peak^2 / MSE), capped at 99 dB when the MSE is exactly zero.
double psnr(const RgbImage& x, const RgbImage& y, double peak = 1.0);

// Mean structural similarity over the three channels: 11x11 Gaussian window
// (sigma 1.5), K1 = 0.01, K2 = 0.03, dynamic range 1. Only fully covered
// windows count, so images must be at least 11 pixels on each side.
double ssim(const RgbImage& x, const RgbImage& y);

}  // namespace nightspec
