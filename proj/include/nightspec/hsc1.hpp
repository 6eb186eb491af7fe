#pragma once

#include <string>

#include "nightspec/imaging.hpp"

namespace nightspec {

// HSC1 cube container, little-endian throughout:
//   offset  0: magic "HSC1" followed by 8 zero bytes
//   offset 12: u32 version (1)
//   offset 16: u32 width, u32 height, u32 n_bands, u32 reserved
//   offset 32: n_bands wavelengths as f32
//   then     : n_bands planes of width*height f32, row-major
// Loads accept n_bands 48 on the native 420-890 grid, or 50 with a 400 and
// 410 nm prefix whose two extra planes are dropped. Anything else is a
// FormatError carrying the offending byte offset.
void save_cube(const std::string& path, const HyperCube& cube);
HyperCube load_cube_hsc1(const std::string& path);

}  // namespace nightspec
