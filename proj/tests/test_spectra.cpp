#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "nightspec/errors.hpp"
#include "nightspec/spectra.hpp"
#include "oracles.hpp"

using namespace nightspec;

namespace {

SpectralCurve impulse(std::size_t band, double value = 1.0) {
  SpectralCurve c;
  c[band] = value;
  return c;
}

}  // namespace

TEST_CASE("the grid runs 420..890 nm in 10 nm steps") {
  CHECK(wavelength(0) == 420.0);
  CHECK(wavelength(kNumBands - 1) == 890.0);
  // VIS/NIR boundary: the last VIS band is 690 nm, the first NIR one 700 nm.
  CHECK(wavelength(kVisBands - 1) == 690.0);
  CHECK(wavelength(kVisBands) == 700.0);
}

TEST_CASE("validate_curve rejects negatives and non-finites") {
  SpectralCurve ok;
  CHECK_NOTHROW(validate_curve(ok, "x"));
  SpectralCurve neg;
  neg[5] = -1e-12;
  CHECK_THROWS_AS(validate_curve(neg, "x"), DomainError);
  SpectralCurve nan;
  nan[40] = std::nan("");
  CHECK_THROWS_AS(validate_curve(nan, "x"), DomainError);
  SpectralCurve inf;
  inf[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(validate_curve(inf, "x"), DomainError);
}

TEST_CASE("luminosity tables carry their defining values") {
  const auto& t = standard_luminosity();
  // An impulse at 510 nm is perceived at exactly the scotopic peak.
  CHECK(perceived_power(t.scotopic, impulse(9)) == 1700.0);
  // The photopic grid maximum sits at 560 nm: 0.995 of the off-grid peak.
  CHECK(t.photopic[14] == 0.995 * 683.0);
  for (std::size_t n = 0; n < kNumBands; ++n) {
    CHECK(t.scotopic[n] <= t.scotopic[9]);
    CHECK(t.photopic[n] <= t.photopic[14]);
    CHECK(t.scotopic[n] >= 0.0);
    CHECK(t.photopic[n] >= 0.0);
  }
  // Scotopic vision sees nothing at 700 nm and beyond; photopic sensitivity
  // runs further, ending before 790 nm.
  CHECK(t.scotopic[kVisBands - 1] > 0.0);
  for (std::size_t n = kVisBands; n < kNumBands; ++n) {
    CHECK(t.scotopic[n] == 0.0);
  }
  CHECK(t.photopic[36] > 0.0);
  for (std::size_t n = 37; n < kNumBands; ++n) {
    CHECK(t.photopic[n] == 0.0);
  }
}

TEST_CASE("perceived power is the plain grid dot product") {
  const auto& t = standard_luminosity();
  const SpectralCurve s = oracles::random_curve(11);
  CHECK(perceived_power(t.scotopic, s) ==
        doctest::Approx(oracles::naive_dot(t.scotopic.data(), s.data(),
                                           kNumBands))
            .epsilon(1e-13));
  // Linear in the spectrum.
  SpectralCurve twice = s;
  for (std::size_t n = 0; n < kNumBands; ++n) twice[n] *= 2.0;
  CHECK(perceived_power(t.scotopic, twice) ==
        doctest::Approx(2.0 * perceived_power(t.scotopic, s)).epsilon(1e-14));
}

TEST_CASE("mesopic blend hits both endpoints exactly") {
  const auto& t = standard_luminosity();
  CHECK(mesopic(t.photopic, t.scotopic, 0.0) == t.scotopic);
  CHECK(mesopic(t.photopic, t.scotopic, 1.0) == t.photopic);
  const SpectralCurve mid = mesopic(t.photopic, t.scotopic, 0.3);
  for (std::size_t n = 0; n < kNumBands; ++n) {
    CHECK(mid[n] == doctest::Approx(0.7 * t.scotopic[n] + 0.3 * t.photopic[n])
                        .epsilon(1e-15));
  }
  CHECK_THROWS_AS(mesopic(t.photopic, t.scotopic, -0.01), DomainError);
  CHECK_THROWS_AS(mesopic(t.photopic, t.scotopic, 1.01), DomainError);
  CHECK_THROWS_AS(mesopic(t.photopic, t.scotopic, std::nan("")), DomainError);
}

TEST_CASE("gaussian curves have the stated shape") {
  // Center and half-maximum points on the lattice: fwhm 40 around 540 nm
  // puts the half maximum exactly at 520 and 560 nm.
  const SpectralCurve g = gaussian_curve(540.0, 40.0, 2.0);
  CHECK(g[12] == 2.0);
  CHECK(g[10] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g[14] == doctest::Approx(1.0).epsilon(1e-12));
  // Far tails snap to exact zero.
  const SpectralCurve narrow = gaussian_curve(450.0, 20.0);
  CHECK(narrow[3] == 1.0);
  CHECK(narrow[kNumBands - 1] == 0.0);
  for (std::size_t n = 0; n < kNumBands; ++n) {
    CHECK(narrow[n] >= 0.0);
    CHECK(narrow[n] <= 1.0);
  }
}

TEST_CASE("bank construction fixes scotopic visibility per base") {
  const auto& t = standard_luminosity();
  std::vector<SpectralCurve> bases;
  bases.push_back(gaussian_curve(500.0, 20.0));  // clearly visible
  bases.push_back(gaussian_curve(850.0, 20.0));  // pure NIR
  bases.push_back(impulse(kVisBands));           // 700 nm: NIR by definition
  const LedBank bank(bases, t.scotopic);
  REQUIRE(bank.size() == 3);
  CHECK(bank.vis_active(0));
  CHECK_FALSE(bank.vis_active(1));
  CHECK_FALSE(bank.vis_active(2));
  for (std::size_t k = 0; k < bank.size(); ++k) {
    CHECK((bank.vis_active(k) ==
           (perceived_power(t.scotopic, bank.base(k)) > 0.0)));
  }
}

TEST_CASE("bank construction rejects degenerate bases") {
  const auto& t = standard_luminosity();
  CHECK_THROWS_AS(LedBank({}, t.scotopic), DomainError);
  CHECK_THROWS_AS(LedBank({SpectralCurve{}}, t.scotopic), DomainError);
  SpectralCurve neg;
  neg[0] = -1.0;
  CHECK_THROWS_AS(LedBank({neg}, t.scotopic), DomainError);
}

TEST_CASE("multiplex is the weighted base sum") {
  const auto& t = standard_luminosity();
  std::vector<SpectralCurve> bases;
  for (int j = 0; j < 5; ++j) {
    bases.push_back(oracles::random_curve(20 + j, 2.0));
    bases.back()[0] += 0.1;  // keep every base nonzero
  }
  const LedBank bank(bases, t.scotopic);
  const std::vector<double> w = {0.1, 0.9, 0.0, 2.0, 0.5};
  const SpectralCurve phi = multiplex(bank, w);
  for (std::size_t n = 0; n < kNumBands; ++n) {
    long double expect = 0.0L;
    for (std::size_t j = 0; j < bases.size(); ++j) {
      expect += static_cast<long double>(w[j]) * bases[j][n];
    }
    CHECK(phi[n] ==
          doctest::Approx(static_cast<double>(expect)).epsilon(1e-13));
  }

  // Bilinear: multiplex(w1 + w2) == multiplex(w1) + multiplex(w2).
  const std::vector<double> w2 = {0.3, 0.0, 1.0, 0.2, 0.7};
  std::vector<double> both(5);
  for (int j = 0; j < 5; ++j) both[j] = w[j] + w2[j];
  const SpectralCurve lhs = multiplex(bank, both);
  const SpectralCurve a = multiplex(bank, w);
  const SpectralCurve b = multiplex(bank, w2);
  for (std::size_t n = 0; n < kNumBands; ++n) {
    CHECK(lhs[n] == doctest::Approx(a[n] + b[n]).epsilon(1e-13));
  }

  CHECK_THROWS_AS(multiplex(bank, std::vector<double>(4, 1.0)), ShapeError);
}

TEST_CASE("the default bank splits into VIS and pure-NIR bases") {
  const LedBank bank = default_led_bank();
  REQUIRE(bank.size() == 26);
  std::size_t vis = 0;
  for (std::size_t k = 0; k < bank.size(); ++k) {
    vis += bank.vis_active(k) ? 1 : 0;
    // Later bases never regain visibility once it is gone.
    if (k > 0 && !bank.vis_active(k - 1)) {
      CHECK_FALSE(bank.vis_active(k));
    }
  }
  CHECK(vis > 0);
  CHECK(vis < bank.size());
}
