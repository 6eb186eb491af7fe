#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nightspec/imaging.hpp"

namespace nightspec {

// Raw plane dump: 3 * width * height little-endian f32, channel-major.
// Carries no dimensions, so loading needs them supplied; values may be
// negative (noise patterns are signed).
void save_rgb_f32(const std::string& path, const RgbImage& image);
RgbImage load_rgb_f32(const std::string& path, std::size_t width,
                      std::size_t height);

// 16-bit RGB PNG; values are clamped to [0,1] and scaled to 0..65535.
void save_rgb_png16(const std::string& path, const RgbImage& image);

struct GrayImage16 {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint16_t> pixels;  // row-major
};

// Single-channel 16-bit PNG, the per-band layout used by cube folders.
void save_gray_png16(const std::string& path, const GrayImage16& image);
GrayImage16 load_gray_png16(const std::string& path);

}  // namespace nightspec
