#pragma once

#include <string>

#include "nightspec/imaging.hpp"
#include "nightspec/spectra.hpp"

namespace nightspec {

// All tables ride the same CSV shape: a fixed header line, then exactly 48
// rows whose first column walks the grid 420,430,...,890. Values are written
// with %.17g so a save/load round-trip reproduces doubles exactly; loads
// reject missing rows, off-grid wavelengths, and negative or non-finite
// values with a FormatError at the offending byte offset.

// header: wavelength_nm,value
void save_spectrum_csv(const std::string& path, const SpectralCurve& curve);
SpectralCurve load_spectrum_csv(const std::string& path);

// header: wavelength_nm,base_0,...,base_{K-1}
void save_bank_csv(const std::string& path, const LedBank& bank);
LedBank load_bank_csv(const std::string& path, const SpectralCurve& scotopic);

// header: wavelength_nm,red,green,blue
void save_camera_csv(const std::string& path, const CameraSensitivity& camera);
CameraSensitivity load_camera_csv(const std::string& path);

}  // namespace nightspec
