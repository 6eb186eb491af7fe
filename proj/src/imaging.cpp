#include "nightspec/imaging.hpp"

#include <cmath>
#include <string>

#include "nightspec/errors.hpp"
#include "nightspec/kernels.hpp"
#include "nightspec/parallel.hpp"
#include "nightspec/rng.hpp"

namespace nightspec {

CameraSensitivity::CameraSensitivity(SpectralCurve r, SpectralCurve g,
                                     SpectralCurve b)
    : rows{std::move(r), std::move(g), std::move(b)} {
  validate_curve(rows[0], "camera red row");
  validate_curve(rows[1], "camera green row");
  validate_curve(rows[2], "camera blue row");
}

HyperCube::HyperCube(std::size_t width, std::size_t height)
    : w_(width), h_(height), data_(kNumBands * width * height, 0.0) {
  if (width == 0 || height == 0) {
    throw ShapeError("cube dimensions must be positive");
  }
}

void HyperCube::set(std::size_t band, std::size_t x, std::size_t y, double v) {
  if (!std::isfinite(v) || v < 0.0) {
    throw DomainError("reflectance must be finite and >= 0, got " +
                      std::to_string(v));
  }
  data_[band * pixels() + y * w_ + x] = static_cast<double>(static_cast<float>(v));
}

RgbImage::RgbImage(std::size_t width, std::size_t height)
    : w_(width), h_(height), data_(3 * width * height, 0.0) {
  if (width == 0 || height == 0) {
    throw ShapeError("image dimensions must be positive");
  }
}

RgbImage render(const HyperCube& cube, const SpectralCurve& spectrum,
                const CameraSensitivity& camera) {
  const std::size_t px = cube.pixels();
  const auto& k = kernels::active();
  RgbImage out(cube.width(), cube.height());
  std::vector<double> nir(px);
  for (std::size_t c = 0; c < 3; ++c) {
    double* plane = out.plane(c);
    for (std::size_t n = 0; n < kVisBands; ++n) {
      k.axpy(plane, cube.plane(n), spectrum[n] * camera.rows[c][n], px);
    }
    std::fill(nir.begin(), nir.end(), 0.0);
    for (std::size_t n = kVisBands; n < kNumBands; ++n) {
      k.axpy(nir.data(), cube.plane(n), spectrum[n] * camera.rows[c][n], px);
    }
    k.add(plane, nir.data(), px);
  }
  return out;
}

SpectralCurve split_vis(const SpectralCurve& spectrum) {
  SpectralCurve out = spectrum;
  for (std::size_t n = kVisBands; n < kNumBands; ++n) {
    out[n] = 0.0;
  }
  return out;
}

BandScales band_scale_factors(const SpectralCurve& phi,
                              const SpectralCurve& phi_hat, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw DomainError("band_scale_factors: epsilon must be > 0");
  }
  const auto& k = kernels::active();
  const double vis_num = k.sum(phi_hat.data(), kVisBands);
  const double vis_den = k.sum(phi.data(), kVisBands);
  const double all_num = k.sum(phi_hat.data(), kNumBands);
  const double all_den = k.sum(phi.data(), kNumBands);
  const auto ratio = [epsilon](double num, double den) {
    if (num == 0.0 && den == 0.0) {
      return 1.0;  // nothing in this slice, so nothing was scaled
    }
    return std::min(num / (den + epsilon), 1.0);
  };
  return BandScales{ratio(vis_num, vis_den), ratio(all_num, all_den)};
}

RgbImage add_noise(const RgbImage& image, double xi, const NoiseModel& model,
                   int threads) {
  if (!(model.kappa > 0.0) || !std::isfinite(model.kappa)) {
    throw DomainError("noise gain kappa must be positive and finite");
  }
  if (!(xi > 0.0 && xi <= 1.0)) {
    throw DomainError("intensity scale xi must lie in (0, 1]");
  }
  const RgbImage* pattern = nullptr;
  if (model.pattern_image.has_value()) {
    pattern = &*model.pattern_image;
    if (pattern->width() != image.width() ||
        pattern->height() != image.height()) {
      throw ShapeError("noise pattern image size does not match input");
    }
  }
  const std::size_t px = image.pixels();
  const std::size_t w = image.width();
  RgbImage out(image.width(), image.height());
  const double* src = image.data();
  double* dst = out.data();
  parallel_for(0, image.elements(), threads, [&](std::size_t lo,
                                                 std::size_t hi) {
    for (std::size_t e = lo; e < hi; ++e) {
      const std::size_t c = e / px;
      const std::size_t y = (e % px) / w;
      const std::size_t x = (e % px) % w;
      const double intensity = src[e];
      if (!(intensity >= 0.0) || !std::isfinite(intensity)) {
        throw DomainError("add_noise input must be finite and >= 0");
      }
      Stream shot(derive_stream(model.seed, kTagPoisson, c, x, y));
      const double mean = intensity * xi / model.kappa;
      double value =
          model.kappa * static_cast<double>(poisson_sample(mean, shot));
      if (pattern != nullptr) {
        value += pattern->at(c, x, y);
      } else if (model.pattern_stddev > 0.0) {
        Stream field(derive_stream(model.seed, kTagPattern, c, x, y));
        value += model.pattern_stddev * gaussian_sample(field);
      }
      dst[e] = value;
    }
  });
  return out;
}

RgbImage clamp01(const RgbImage& image) {
  RgbImage out = image;
  double* d = out.data();
  for (std::size_t e = 0; e < out.elements(); ++e) {
    d[e] = std::min(std::max(d[e], 0.0), 1.0);
  }
  return out;
}

}  // namespace nightspec
