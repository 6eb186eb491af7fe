#include "nightspec/image_io.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "nightspec/errors.hpp"

namespace nightspec {

namespace {

struct CFile {
  std::FILE* f = nullptr;
  ~CFile() {
    if (f != nullptr) {
      std::fclose(f);
    }
  }
};

void put_f32_le(std::ostream& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  const unsigned char b[4] = {static_cast<unsigned char>(bits),
                              static_cast<unsigned char>(bits >> 8),
                              static_cast<unsigned char>(bits >> 16),
                              static_cast<unsigned char>(bits >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint16_t quantize16(double v) {
  const double clamped = std::min(std::max(v, 0.0), 1.0);
  return static_cast<std::uint16_t>(std::lround(clamped * 65535.0));
}

}  // namespace

void save_rgb_f32(const std::string& path, const RgbImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw FormatError("cannot open for writing: " + path, 0);
  }
  const double* d = image.data();
  for (std::size_t e = 0; e < image.elements(); ++e) {
    put_f32_le(out, static_cast<float>(d[e]));
  }
  if (!out) {
    throw FormatError("write failed: " + path, 0);
  }
}

RgbImage load_rgb_f32(const std::string& path, std::size_t width,
                      std::size_t height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open: " + path, 0);
  }
  std::vector<unsigned char> buf(std::istreambuf_iterator<char>(in), {});
  const std::size_t expected = 3 * width * height * 4;
  if (buf.size() != expected) {
    throw FormatError("size mismatch in " + path + " (expected " +
                          std::to_string(expected) + " bytes)",
                      static_cast<long long>(buf.size()));
  }
  RgbImage image(width, height);
  double* d = image.data();
  for (std::size_t e = 0; e < image.elements(); ++e) {
    std::uint32_t bits = static_cast<std::uint32_t>(buf[4 * e]) |
                         static_cast<std::uint32_t>(buf[4 * e + 1]) << 8 |
                         static_cast<std::uint32_t>(buf[4 * e + 2]) << 16 |
                         static_cast<std::uint32_t>(buf[4 * e + 3]) << 24;
    float v;
    std::memcpy(&v, &bits, 4);
    if (!std::isfinite(v)) {
      throw FormatError("non-finite value in " + path,
                        static_cast<long long>(4 * e));
    }
    d[e] = v;
  }
  return image;
}

void save_rgb_png16(const std::string& path, const RgbImage& image) {
  const std::size_t w = image.width();
  const std::size_t h = image.height();
  // PNG 16-bit samples are big-endian on the wire; pack them that way here.
  std::vector<unsigned char> bytes(h * w * 6);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        const std::uint16_t q = quantize16(image.at(c, x, y));
        const std::size_t at = (y * w + x) * 6 + c * 2;
        bytes[at] = static_cast<unsigned char>(q >> 8);
        bytes[at + 1] = static_cast<unsigned char>(q & 0xff);
      }
    }
  }
  std::vector<png_bytep> rows(h);
  for (std::size_t y = 0; y < h; ++y) {
    rows[y] = bytes.data() + y * w * 6;
  }

  CFile file;
  file.f = std::fopen(path.c_str(), "wb");
  if (file.f == nullptr) {
    throw FormatError("cannot open for writing: " + path, 0);
  }
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw FormatError("libpng setup failed for " + path, 0);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw FormatError("libpng failure writing " + path, 0);
  }
  png_init_io(png, file.f);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w),
               static_cast<png_uint_32>(h), 16, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void save_gray_png16(const std::string& path, const GrayImage16& image) {
  const std::size_t w = image.width;
  const std::size_t h = image.height;
  if (w == 0 || h == 0 || image.pixels.size() != w * h) {
    throw ShapeError("gray image dimensions do not match pixel count");
  }
  std::vector<unsigned char> bytes(h * w * 2);
  for (std::size_t p = 0; p < w * h; ++p) {
    bytes[2 * p] = static_cast<unsigned char>(image.pixels[p] >> 8);
    bytes[2 * p + 1] = static_cast<unsigned char>(image.pixels[p] & 0xff);
  }
  std::vector<png_bytep> rows(h);
  for (std::size_t y = 0; y < h; ++y) {
    rows[y] = bytes.data() + y * w * 2;
  }

  CFile file;
  file.f = std::fopen(path.c_str(), "wb");
  if (file.f == nullptr) {
    throw FormatError("cannot open for writing: " + path, 0);
  }
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw FormatError("libpng setup failed for " + path, 0);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw FormatError("libpng failure writing " + path, 0);
  }
  png_init_io(png, file.f);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w),
               static_cast<png_uint_32>(h), 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

GrayImage16 load_gray_png16(const std::string& path) {
  CFile file;
  file.f = std::fopen(path.c_str(), "rb");
  if (file.f == nullptr) {
    throw FormatError("cannot open: " + path, 0);
  }
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.f) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw FormatError("not a PNG: " + path, 0);
  }
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw FormatError("libpng setup failed for " + path, 0);
  }

  GrayImage16 out;
  std::vector<unsigned char> bytes;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("libpng failure reading " + path, 0);
  }
  png_init_io(png, file.f);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (depth != 16 || color != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    // 24 is where the IHDR chunk stores bit depth.
    throw FormatError("need 16-bit grayscale: " + path, 24);
  }
  bytes.resize(static_cast<std::size_t>(w) * h * 2);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) {
    rows[y] = bytes.data() + static_cast<std::size_t>(y) * w * 2;
  }
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  out.width = w;
  out.height = h;
  out.pixels.resize(static_cast<std::size_t>(w) * h);
  for (std::size_t p = 0; p < out.pixels.size(); ++p) {
    out.pixels[p] = static_cast<std::uint16_t>(
        static_cast<std::uint16_t>(bytes[2 * p]) << 8 | bytes[2 * p + 1]);
  }
  return out;
}

}  // namespace nightspec
