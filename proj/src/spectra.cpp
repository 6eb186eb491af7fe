#include "nightspec/spectra.hpp"

#include <cmath>
#include <utility>

#include "nightspec/errors.hpp"
#include "nightspec/kernels.hpp"

namespace nightspec {

namespace {

// CIE 1924 photopic V(lambda) at the grid wavelengths, zero from 790 nm on.
constexpr std::array<double, kNumBands> kPhotopicRel = {
    0.0040,   0.0116,  0.023,    0.038,    0.060,    0.09098,  0.13902,
    0.20802,  0.323,   0.503,    0.710,    0.862,    0.954,    0.99495,
    0.995,    0.952,   0.870,    0.757,    0.631,    0.503,    0.381,
    0.265,    0.175,   0.107,    0.061,    0.032,    0.017,    0.00821,
    0.004102, 0.002091, 0.001047, 0.00052, 0.000249, 0.00012,  0.00006,
    0.00003,  0.000015, 0.0,      0.0,     0.0,      0.0,      0.0,
    0.0,      0.0,      0.0,      0.0,     0.0,      0.0,
};

// CIE 1951 scotopic V'(lambda) at the grid wavelengths. The true peak sits
// off-grid at 507 nm; on this grid the maximum lands on the 510 nm band.
// Zero from 700 nm on.
constexpr std::array<double, kNumBands> kScotopicRel = {
    0.0966,    0.1998,   0.3281,    0.4550,    0.5670,   0.6760,  0.7930,
    0.9040,    0.9820,   0.9970,    0.9350,    0.8110,   0.6500,  0.4810,
    0.3288,    0.2076,   0.1212,    0.0655,    0.03315,  0.01593, 0.00737,
    0.003335,  0.001497, 0.000677,  0.0003129, 0.000148, 0.0000715,
    0.00003533, 0.0,     0.0,       0.0,       0.0,      0.0,     0.0,
    0.0,       0.0,      0.0,       0.0,       0.0,      0.0,     0.0,
    0.0,       0.0,      0.0,       0.0,       0.0,      0.0,     0.0,
};

constexpr std::size_t kScotopicPeakBand = 9;  // 510 nm

LuminosityTables build_tables() {
  LuminosityTables t;
  const double scot_scale = 1700.0 / kScotopicRel[kScotopicPeakBand];
  for (std::size_t n = 0; n < kNumBands; ++n) {
    t.photopic[n] = kPhotopicRel[n] * 683.0;
    t.scotopic[n] = kScotopicRel[n] * scot_scale;
  }
  // Pin the peak so an impulse at 510 nm reads back exactly 1700.
  t.scotopic[kScotopicPeakBand] = 1700.0;
  return t;
}

}  // namespace

void validate_curve(const SpectralCurve& c, const std::string& what) {
  for (std::size_t n = 0; n < kNumBands; ++n) {
    if (!std::isfinite(c[n])) {
      throw DomainError(what + ": non-finite value at " +
                        std::to_string(wavelength(n)) + " nm");
    }
    if (c[n] < 0.0) {
      throw DomainError(what + ": negative value at " +
                        std::to_string(wavelength(n)) + " nm");
    }
  }
}

double perceived_power(const SpectralCurve& luminosity,
                       const SpectralCurve& spectrum) {
  return kernels::active().dot(luminosity.data(), spectrum.data(), kNumBands);
}

const LuminosityTables& standard_luminosity() {
  static const LuminosityTables tables = build_tables();
  return tables;
}

SpectralCurve mesopic(const SpectralCurve& photopic,
                      const SpectralCurve& scotopic, double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("mesopic mixing parameter must lie in [0,1], got " +
                      std::to_string(x));
  }
  SpectralCurve out;
  for (std::size_t n = 0; n < kNumBands; ++n) {
    out[n] = (1.0 - x) * scotopic[n] + x * photopic[n];
  }
  return out;
}

LedBank::LedBank(std::vector<SpectralCurve> bases,
                 const SpectralCurve& scotopic)
    : bases_(std::move(bases)) {
  if (bases_.empty()) {
    throw DomainError("LED bank needs at least one base");
  }
  vis_active_.reserve(bases_.size());
  for (std::size_t k = 0; k < bases_.size(); ++k) {
    const std::string name = "LED base " + std::to_string(k);
    validate_curve(bases_[k], name);
    double total = kernels::active().sum(bases_[k].data(), kNumBands);
    if (total <= 0.0) {
      throw DomainError(name + ": identically zero");
    }
    vis_active_.push_back(perceived_power(scotopic, bases_[k]) > 0.0);
  }
}

SpectralCurve multiplex(const LedBank& bank, std::span<const double> sigma) {
  if (sigma.size() != bank.size()) {
    throw ShapeError("multiplex: " + std::to_string(sigma.size()) +
                     " weights for a bank of " + std::to_string(bank.size()));
  }
  SpectralCurve out;
  const auto& k = kernels::active();
  for (std::size_t j = 0; j < bank.size(); ++j) {
    k.axpy(out.data(), bank.base(j).data(), sigma[j], kNumBands);
  }
  return out;
}

SpectralCurve gaussian_curve(double center_nm, double fwhm_nm, double peak) {
  if (!(fwhm_nm > 0.0) || !std::isfinite(center_nm) || !(peak >= 0.0)) {
    throw DomainError("gaussian_curve: need fwhm > 0, peak >= 0, finite center");
  }
  const double decay = 4.0 * std::log(2.0) / (fwhm_nm * fwhm_nm);
  const double floor = peak * 1e-12;
  SpectralCurve out;
  for (std::size_t n = 0; n < kNumBands; ++n) {
    const double d = wavelength(n) - center_nm;
    const double val = peak * std::exp(-decay * d * d);
    out[n] = val < floor ? 0.0 : val;
  }
  return out;
}

LedBank default_led_bank() {
  constexpr std::size_t kBankSize = 26;
  std::vector<SpectralCurve> bases;
  bases.reserve(kBankSize);
  for (std::size_t j = 0; j < kBankSize; ++j) {
    const double center =
        kStartNm + static_cast<double>(j) * (890.0 - kStartNm) /
                       static_cast<double>(kBankSize - 1);
    bases.push_back(gaussian_curve(center, 20.0));
  }
  return LedBank(std::move(bases), standard_luminosity().scotopic);
}

}  // namespace nightspec
