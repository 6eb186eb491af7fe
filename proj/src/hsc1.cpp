#include "nightspec/hsc1.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "nightspec/errors.hpp"

namespace nightspec {

namespace {

constexpr char kMagic[12] = {'H', 'S', 'C', '1', 0, 0, 0, 0, 0, 0, 0, 0};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 32;

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f32(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

std::uint32_t get_u32(const std::vector<unsigned char>& buf, std::size_t at) {
  return static_cast<std::uint32_t>(buf[at]) |
         static_cast<std::uint32_t>(buf[at + 1]) << 8 |
         static_cast<std::uint32_t>(buf[at + 2]) << 16 |
         static_cast<std::uint32_t>(buf[at + 3]) << 24;
}

float get_f32(const std::vector<unsigned char>& buf, std::size_t at) {
  const std::uint32_t bits = get_u32(buf, at);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace

void save_cube(const std::string& path, const HyperCube& cube) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw FormatError("cannot open for writing: " + path, 0);
  }
  out.write(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(cube.width()));
  put_u32(out, static_cast<std::uint32_t>(cube.height()));
  put_u32(out, static_cast<std::uint32_t>(kNumBands));
  put_u32(out, 0);
  for (std::size_t n = 0; n < kNumBands; ++n) {
    put_f32(out, static_cast<float>(wavelength(n)));
  }
  for (std::size_t n = 0; n < kNumBands; ++n) {
    const double* plane = cube.plane(n);
    for (std::size_t p = 0; p < cube.pixels(); ++p) {
      put_f32(out, static_cast<float>(plane[p]));
    }
  }
  if (!out) {
    throw FormatError("write failed: " + path, 0);
  }
}

HyperCube load_cube_hsc1(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open: " + path, 0);
  }
  std::vector<unsigned char> buf(std::istreambuf_iterator<char>(in), {});

  if (buf.size() < kHeaderBytes) {
    throw FormatError("truncated header in " + path,
                      static_cast<long long>(buf.size()));
  }
  for (std::size_t i = 0; i < sizeof(kMagic); ++i) {
    if (buf[i] != static_cast<unsigned char>(kMagic[i])) {
      throw FormatError("bad magic in " + path, static_cast<long long>(i));
    }
  }
  if (get_u32(buf, 12) != kVersion) {
    throw FormatError("unsupported version in " + path, 12);
  }
  const std::size_t width = get_u32(buf, 16);
  const std::size_t height = get_u32(buf, 20);
  const std::size_t n_bands = get_u32(buf, 24);
  if (width == 0 || height == 0) {
    throw FormatError("zero-sized cube in " + path, width == 0 ? 16 : 20);
  }
  if (n_bands != kNumBands && n_bands != kNumBands + 2) {
    throw FormatError("band count " + std::to_string(n_bands) + " in " + path,
                      24);
  }
  // The 50-band variant carries a 400 and 410 nm prefix to skip.
  const std::size_t skip = n_bands - kNumBands;

  const std::size_t wl_at = kHeaderBytes;
  const std::size_t planes_at = wl_at + 4 * n_bands;
  const std::size_t expected = planes_at + 4 * n_bands * width * height;
  if (buf.size() != expected) {
    throw FormatError("size mismatch in " + path + " (expected " +
                          std::to_string(expected) + " bytes)",
                      static_cast<long long>(buf.size()));
  }
  for (std::size_t n = 0; n < n_bands; ++n) {
    const double want = 420.0 + 10.0 * (static_cast<double>(n) -
                                        static_cast<double>(skip));
    if (get_f32(buf, wl_at + 4 * n) != static_cast<float>(want)) {
      throw FormatError("unexpected wavelength in " + path,
                        static_cast<long long>(wl_at + 4 * n));
    }
  }

  HyperCube cube(width, height);
  const std::size_t px = width * height;
  for (std::size_t n = skip; n < n_bands; ++n) {
    for (std::size_t p = 0; p < px; ++p) {
      const std::size_t at = planes_at + 4 * (n * px + p);
      const float v = get_f32(buf, at);
      if (!std::isfinite(v) || v < 0.0f) {
        throw FormatError("bad reflectance value in " + path,
                          static_cast<long long>(at));
      }
      cube.set(n - skip, p % width, p / width, v);
    }
  }
  return cube;
}

}  // namespace nightspec
