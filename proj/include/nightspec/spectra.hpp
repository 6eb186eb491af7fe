#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace nightspec {

// Every curve and cube in the project shares one sampling grid: 48 bands,
// 10 nm apart, band n at (420 + 10n) nm, so band 47 is 890 nm. Bands 0..27
// (420-690 nm) are the VIS range; 700 nm and above count as NIR.
inline constexpr std::size_t kNumBands = 48;
inline constexpr std::size_t kVisBands = 28;
inline constexpr double kStartNm = 420.0;
inline constexpr double kStepNm = 10.0;

constexpr double wavelength(std::size_t band) {
  return kStartNm + kStepNm * static_cast<double>(band);
}

// Intensity per band, arbitrary radiometric units. Arithmetic helpers leave
// validation to the boundaries (file IO, bank construction) so intermediate
// values such as curve differences may go negative.
struct SpectralCurve {
  std::array<double, kNumBands> v{};

  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }
  double* data() { return v.data(); }
  const double* data() const { return v.data(); }
  static constexpr std::size_t size() { return kNumBands; }

  friend bool operator==(const SpectralCurve&, const SpectralCurve&) = default;
};

// Throws DomainError naming `what` if any entry is negative or non-finite.
void validate_curve(const SpectralCurve& c, const std::string& what);

// Psi = sum_n luminosity(n) * spectrum(n). Plain dot product on the 10 nm
// grid; the bandwidth factor is absorbed into the tables.
double perceived_power(const SpectralCurve& luminosity,
                       const SpectralCurve& spectrum);

struct LuminosityTables {
  SpectralCurve photopic;  // CIE 1924, scaled to 683 at the 555 nm peak
  SpectralCurve scotopic;  // CIE 1951, 1700 at the 510 nm band, zero >= 700 nm
};

const LuminosityTables& standard_luminosity();

// V_M = (1-x) V' + x V. Throws DomainError unless 0 <= x <= 1.
SpectralCurve mesopic(const SpectralCurve& photopic,
                      const SpectralCurve& scotopic, double x);

// K emission spectra plus a per-base flag for whether the base is visible at
// all under scotopic vision: vis_active(k) == (perceived_power(V', base k) > 0),
// fixed at construction.
class LedBank {
 public:
  LedBank(std::vector<SpectralCurve> bases, const SpectralCurve& scotopic);

  std::size_t size() const { return bases_.size(); }
  const SpectralCurve& base(std::size_t k) const { return bases_[k]; }
  const std::vector<SpectralCurve>& bases() const { return bases_; }
  bool vis_active(std::size_t k) const { return vis_active_[k]; }

 private:
  std::vector<SpectralCurve> bases_;
  std::vector<bool> vis_active_;
};

// Phi = sum_k sigma[k] * base_k, per band. Throws ShapeError when sigma's
// length is not the bank size.
SpectralCurve multiplex(const LedBank& bank, std::span<const double> sigma);

// peak * exp(-4 ln2 (lambda-center)^2 / fwhm^2) on the grid. Tail values
// below 1e-12 of the peak snap to zero so bases far from the VIS range
// register as exactly invisible.
SpectralCurve gaussian_curve(double center_nm, double fwhm_nm,
                             double peak = 1.0);

// 26 unit-peak Gaussians, FWHM 20 nm, centers evenly spaced 420-890 nm.
LedBank default_led_bank();

}  // namespace nightspec
