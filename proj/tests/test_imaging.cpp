#include <cmath>
#include <vector>

#include "doctest.h"
#include "nightspec/dataset.hpp"
#include "nightspec/errors.hpp"
#include "nightspec/imaging.hpp"
#include "nightspec/rng.hpp"
#include "oracles.hpp"

using namespace nightspec;

TEST_CASE("cube values live on the float32 lattice") {
  HyperCube cube(4, 3);
  cube.set(0, 1, 2, 0.1);
  CHECK(cube.at(0, 1, 2) == static_cast<double>(static_cast<float>(0.1)));
  CHECK_THROWS_AS(cube.set(0, 0, 0, -0.5), DomainError);
  CHECK_THROWS_AS(cube.set(0, 0, 0, std::nan("")), DomainError);
  CHECK_THROWS_AS(HyperCube(0, 4), ShapeError);
  CHECK_THROWS_AS(HyperCube(4, 0), ShapeError);
  CHECK_THROWS_AS(RgbImage(0, 1), ShapeError);
}

TEST_CASE("render matches the per-pixel triple loop") {
  const CameraSensitivity& cam = default_camera();
  for (int trial = 0; trial < 20; ++trial) {
    const HyperCube cube = oracles::random_cube(7, 5, 900 + trial);
    const SpectralCurve phi = oracles::random_curve(40 + trial, 2.0);
    const RgbImage got = render(cube, phi, cam);
    const RgbImage want = oracles::naive_render(cube, phi, cam);
    for (std::size_t e = 0; e < got.elements(); ++e) {
      CHECK(got.data()[e] ==
            doctest::Approx(want.data()[e]).epsilon(1e-12));
    }
  }
}

TEST_CASE("render is linear in the spectrum") {
  const CameraSensitivity& cam = default_camera();
  const HyperCube cube = oracles::random_cube(6, 6, 17);
  const SpectralCurve a = oracles::random_curve(1);
  const SpectralCurve b = oracles::random_curve(2);
  SpectralCurve ab;
  for (std::size_t n = 0; n < kNumBands; ++n) ab[n] = a[n] + b[n];
  const RgbImage ra = render(cube, a, cam);
  const RgbImage rb = render(cube, b, cam);
  const RgbImage rab = render(cube, ab, cam);
  for (std::size_t e = 0; e < rab.elements(); ++e) {
    CHECK(rab.data()[e] ==
          doctest::Approx(ra.data()[e] + rb.data()[e]).epsilon(1e-12));
  }
}

TEST_CASE("split_vis zeroes exactly the NIR bands") {
  const SpectralCurve phi = oracles::random_curve(3);
  const SpectralCurve vis = split_vis(phi);
  for (std::size_t n = 0; n < kVisBands; ++n) {
    CHECK(vis[n] == phi[n]);
  }
  for (std::size_t n = kVisBands; n < kNumBands; ++n) {
    CHECK(vis[n] == 0.0);
  }
  CHECK(split_vis(vis) == vis);
}

TEST_CASE("a render decomposes bit-exactly into VIS and NIR halves") {
  const CameraSensitivity& cam = default_camera();
  const HyperCube cube = oracles::random_cube(9, 4, 33);
  const SpectralCurve phi = oracles::random_curve(8, 1.5);
  const SpectralCurve vis = split_vis(phi);
  SpectralCurve nir;
  for (std::size_t n = 0; n < kNumBands; ++n) nir[n] = phi[n] - vis[n];

  const RgbImage full = render(cube, phi, cam);
  const RgbImage rv = render(cube, vis, cam);
  const RgbImage rn = render(cube, nir, cam);
  for (std::size_t e = 0; e < full.elements(); ++e) {
    CHECK(full.data()[e] == rv.data()[e] + rn.data()[e]);
  }
}

TEST_CASE("band scale factors follow the energy ratios") {
  SpectralCurve phi;
  SpectralCurve phi_hat;
  for (std::size_t n = 0; n < kNumBands; ++n) {
    phi[n] = 1.0 + static_cast<double>(n);
    phi_hat[n] = n < kVisBands ? 0.25 * phi[n] : phi[n];
  }
  const double eps = 1e-9;
  const BandScales s = band_scale_factors(phi, phi_hat, eps);
  double vis_num = 0, vis_den = 0, all_num = 0, all_den = 0;
  for (std::size_t n = 0; n < kNumBands; ++n) {
    all_num += phi_hat[n];
    all_den += phi[n];
    if (n < kVisBands) {
      vis_num += phi_hat[n];
      vis_den += phi[n];
    }
  }
  CHECK(s.xi_vis == doctest::Approx(vis_num / (vis_den + eps)).epsilon(1e-12));
  CHECK(s.xi_nir == doctest::Approx(all_num / (all_den + eps)).epsilon(1e-12));

  // Unscaled spectra land within epsilon/energy of 1 and never above it.
  const BandScales same = band_scale_factors(phi, phi, 1e-9);
  CHECK(same.xi_vis <= 1.0);
  CHECK(same.xi_nir <= 1.0);
  CHECK(same.xi_vis > 1.0 - 1e-10);
  CHECK(same.xi_nir > 1.0 - 1e-10);

  // An empty slice means nothing was scaled there.
  SpectralCurve nir_only;
  for (std::size_t n = kVisBands; n < kNumBands; ++n) nir_only[n] = 2.0;
  const BandScales empty_vis = band_scale_factors(nir_only, nir_only, 1e-9);
  CHECK(empty_vis.xi_vis == 1.0);

  CHECK_THROWS_AS(band_scale_factors(phi, phi_hat, 0.0), DomainError);
}

TEST_CASE("shot noise has Poisson moments") {
  const double kappa = 1.0 / 255.0;
  const double intensity = 0.4;
  for (const double xi : {1.0, 0.2}) {
    RgbImage img(200, 200);
    for (std::size_t e = 0; e < img.elements(); ++e) {
      img.data()[e] = intensity;
    }
    NoiseModel model;
    model.kappa = kappa;
    model.seed = 321 + static_cast<std::uint64_t>(xi * 10);
    const RgbImage noisy = add_noise(img, xi, model);
    double sum = 0, sum_sq = 0;
    const auto n = static_cast<double>(noisy.elements());
    for (std::size_t e = 0; e < noisy.elements(); ++e) {
      sum += noisy.data()[e];
      sum_sq += noisy.data()[e] * noisy.data()[e];
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    // E = intensity * xi, Var = kappa * intensity * xi.
    const double want_mean = intensity * xi;
    const double want_var = kappa * intensity * xi;
    CHECK(std::abs(mean - want_mean) < 4.0 * std::sqrt(want_var / n));
    CHECK(std::abs(var - want_var) <
          4.0 * want_var * std::sqrt(2.0 / n) * 2.0);
  }
}

TEST_CASE("pattern noise adds its stddev in quadrature") {
  RgbImage img(180, 180);
  for (std::size_t e = 0; e < img.elements(); ++e) {
    img.data()[e] = 0.2;
  }
  NoiseModel model;
  model.kappa = 1.0 / 255.0;
  model.seed = 7;
  model.pattern_stddev = 0.05;
  const RgbImage noisy = add_noise(img, 1.0, model);
  double sum = 0, sum_sq = 0;
  const auto n = static_cast<double>(noisy.elements());
  for (std::size_t e = 0; e < noisy.elements(); ++e) {
    sum += noisy.data()[e];
    sum_sq += noisy.data()[e] * noisy.data()[e];
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  const double want_var = model.kappa * 0.2 + 0.05 * 0.05;
  CHECK(std::abs(mean - 0.2) < 4.0 * std::sqrt(want_var / n));
  CHECK(std::abs(var - want_var) < 4.0 * want_var * std::sqrt(2.0 / n) * 2.0);
}

TEST_CASE("a fixed pattern image passes through exactly") {
  RgbImage zero(5, 4);
  RgbImage pattern(5, 4);
  for (std::size_t e = 0; e < pattern.elements(); ++e) {
    pattern.data()[e] = 0.01 * static_cast<double>(e);
  }
  NoiseModel model;
  model.pattern_image = pattern;
  // Zero input means zero Poisson counts, so the output IS the pattern.
  const RgbImage out = add_noise(zero, 1.0, model);
  CHECK(out == pattern);

  NoiseModel bad;
  bad.pattern_image = RgbImage(4, 4);
  CHECK_THROWS_AS(add_noise(zero, 1.0, bad), ShapeError);
}

TEST_CASE("noise is deterministic and thread-count invariant") {
  const HyperCube cube = oracles::random_cube(13, 9, 5);
  const RgbImage img = render(cube, oracles::random_curve(6), default_camera());
  NoiseModel model;
  model.seed = 99;
  model.pattern_stddev = 0.02;
  const RgbImage serial = add_noise(img, 0.7, model, 1);
  const RgbImage again = add_noise(img, 0.7, model, 1);
  const RgbImage parallel4 = add_noise(img, 0.7, model, 4);
  const RgbImage parallel7 = add_noise(img, 0.7, model, 7);
  CHECK(serial == again);
  CHECK(serial == parallel4);
  CHECK(serial == parallel7);

  model.seed = 100;
  const RgbImage other = add_noise(img, 0.7, model, 1);
  CHECK(serial != other);
}

TEST_CASE("noise rejects out-of-domain inputs") {
  RgbImage img(3, 3);
  NoiseModel model;
  CHECK_THROWS_AS(add_noise(img, 0.0, model), DomainError);
  CHECK_THROWS_AS(add_noise(img, 1.5, model), DomainError);
  CHECK_THROWS_AS(add_noise(img, -0.3, model), DomainError);
  model.kappa = 0.0;
  CHECK_THROWS_AS(add_noise(img, 1.0, model), DomainError);
  model.kappa = 1.0 / 255.0;
  img.data()[4] = -1e-9;
  CHECK_THROWS_AS(add_noise(img, 1.0, model), DomainError);
}

TEST_CASE("clamp01 clips into the unit range") {
  RgbImage img(2, 2);
  img.data()[0] = -0.5;
  img.data()[1] = 0.25;
  img.data()[2] = 1.5;
  const RgbImage c = clamp01(img);
  CHECK(c.data()[0] == 0.0);
  CHECK(c.data()[1] == 0.25);
  CHECK(c.data()[2] == 1.0);
}
