#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "nightspec/spectra.hpp"

namespace nightspec {

// Camera spectral sensitivity, one curve per channel in R, G, B order.
struct CameraSensitivity {
  std::array<SpectralCurve, 3> rows;

  CameraSensitivity(SpectralCurve r, SpectralCurve g, SpectralCurve b);
};

// Reflectance per band per pixel, band-major planes (row-major inside each
// plane). Values pass through float32 on write, keeping every cube on the
// lattice that the on-disk format can represent, so save/load round-trips
// are bit-exact.
class HyperCube {
 public:
  HyperCube(std::size_t width, std::size_t height);

  std::size_t width() const { return w_; }
  std::size_t height() const { return h_; }
  std::size_t pixels() const { return w_ * h_; }

  void set(std::size_t band, std::size_t x, std::size_t y, double v);
  double at(std::size_t band, std::size_t x, std::size_t y) const {
    return data_[band * pixels() + y * w_ + x];
  }
  const double* plane(std::size_t band) const {
    return data_.data() + band * pixels();
  }

  friend bool operator==(const HyperCube&, const HyperCube&) = default;

 private:
  std::size_t w_, h_;
  std::vector<double> data_;
};

// 3 x W x H intensities, channel-major planes. Noise-free renders are
// non-negative; noisy images may dip below zero from the additive pattern,
// so nothing here clamps (see clamp01).
class RgbImage {
 public:
  RgbImage(std::size_t width, std::size_t height);

  std::size_t width() const { return w_; }
  std::size_t height() const { return h_; }
  std::size_t pixels() const { return w_ * h_; }
  std::size_t elements() const { return 3 * w_ * h_; }

  double at(std::size_t c, std::size_t x, std::size_t y) const {
    return data_[c * pixels() + y * w_ + x];
  }
  void set(std::size_t c, std::size_t x, std::size_t y, double v) {
    data_[c * pixels() + y * w_ + x] = v;
  }
  double* plane(std::size_t c) { return data_.data() + c * pixels(); }
  const double* plane(std::size_t c) const {
    return data_.data() + c * pixels();
  }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  std::size_t w_, h_;
  std::vector<double> data_;
};

// I_c(x,y) = sum_n T(n,x,y) * phi(n) * C_c(n). Bands 0..27 accumulate into
// one plane and bands 28..47 into another before the two are added, so a
// render decomposes bit-exactly into its VIS and NIR halves.
RgbImage render(const HyperCube& cube, const SpectralCurve& spectrum,
                const CameraSensitivity& camera);

// Copy with every band at 700 nm or above zeroed.
SpectralCurve split_vis(const SpectralCurve& spectrum);

struct BandScales {
  double xi_vis;
  double xi_nir;
};

// xi_vis = sum(split_vis(phi_hat)) / (sum(split_vis(phi)) + eps) and
// xi_nir = sum(phi_hat) / (sum(phi) + eps), both clamped to (0, 1]. A 0/0
// ratio (no energy in the slice at all) means no scaling happened and
// yields 1.
BandScales band_scale_factors(const SpectralCurve& phi,
                              const SpectralCurve& phi_hat, double epsilon);

// Additive pattern N standing in for a sampled sensor noise field: a seeded
// zero-mean Gaussian unless a concrete pattern image overrides it.
struct NoiseModel {
  double kappa = 1.0 / 255.0;
  std::uint64_t seed = 0;
  double pattern_stddev = 0.0;
  std::optional<RgbImage> pattern_image;
};

// Per element: kappa * Poisson(I * xi / kappa) + N. Every element's draws
// come from a stream derived from (seed, channel, x, y), so the result is
// bit-identical no matter how many threads carve up the image.
RgbImage add_noise(const RgbImage& image, double xi, const NoiseModel& model,
                   int threads = 1);

RgbImage clamp01(const RgbImage& image);

}  // namespace nightspec
