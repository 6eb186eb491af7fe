#include "nightspec/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "nightspec/errors.hpp"
#include "nightspec/hsc1.hpp"
#include "nightspec/image_io.hpp"
#include "nightspec/kernels.hpp"
#include "nightspec/rng.hpp"
#include "nightspec/visibility.hpp"

namespace fs = std::filesystem;

namespace nightspec {

namespace {

void check_reflectance(const SpectralCurve& c, const std::string& what) {
  validate_curve(c, what);
  for (std::size_t n = 0; n < kNumBands; ++n) {
    if (c[n] > 1.0) {
      throw DomainError(what + ": reflectance above 1 at " +
                        std::to_string(wavelength(n)) + " nm");
    }
  }
}

}  // namespace

SpectralCurve reflect_flat(double value) {
  SpectralCurve c;
  c.v.fill(value);
  check_reflectance(c, "flat reflectance");
  return c;
}

SpectralCurve reflect_bump(double center_nm, double fwhm_nm, double amplitude,
                           double floor) {
  SpectralCurve c = gaussian_curve(center_nm, fwhm_nm, amplitude);
  for (std::size_t n = 0; n < kNumBands; ++n) {
    c[n] += floor;
  }
  check_reflectance(c, "bump reflectance");
  return c;
}

SpectralCurve reflect_ramp(double start_value, double end_value) {
  SpectralCurve c;
  for (std::size_t n = 0; n < kNumBands; ++n) {
    const double t = static_cast<double>(n) / (kNumBands - 1);
    c[n] = start_value + t * (end_value - start_value);
  }
  check_reflectance(c, "ramp reflectance");
  return c;
}

std::pair<SpectralCurve, SpectralCurve> metamer_nir_differs() {
  // Shared visible body, then one patch reflects the near half of the NIR
  // range and the other the far half.
  SpectralCurve a = reflect_bump(540.0, 90.0, 0.5, 0.1);
  SpectralCurve b = a;
  for (std::size_t n = kVisBands; n < kNumBands; ++n) {
    const double wl = wavelength(n);
    a[n] = wl < 800.0 ? 0.8 : 0.1;
    b[n] = wl < 800.0 ? 0.1 : 0.8;
  }
  return {a, b};
}

std::pair<SpectralCurve, SpectralCurve> metamer_vis_differs() {
  SpectralCurve a = reflect_bump(470.0, 60.0, 0.6, 0.05);
  SpectralCurve b = reflect_bump(610.0, 60.0, 0.6, 0.05);
  for (std::size_t n = kVisBands; n < kNumBands; ++n) {
    a[n] = 0.4;
    b[n] = 0.4;
  }
  return {a, b};
}

HyperCube synth_scene(const SceneSpec& spec) {
  if (spec.rows == 0 || spec.cols == 0 || spec.patch_px == 0) {
    throw DomainError("scene layout must have positive rows, cols, patch size");
  }
  if (spec.patch_spectra.empty()) {
    throw DomainError("scene needs at least one patch spectrum");
  }
  for (std::size_t i = 0; i < spec.patch_spectra.size(); ++i) {
    check_reflectance(spec.patch_spectra[i],
                      "patch spectrum " + std::to_string(i));
  }

  const std::size_t cells = spec.rows * spec.cols;
  std::vector<std::size_t> assign(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    assign[i] = i % spec.patch_spectra.size();
  }
  Stream shuffle(derive_stream(spec.seed, kTagScene));
  for (std::size_t i = cells; i > 1; --i) {
    const std::size_t j = shuffle.next_u64() % i;
    std::swap(assign[i - 1], assign[j]);
  }

  HyperCube cube(spec.cols * spec.patch_px, spec.rows * spec.patch_px);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const SpectralCurve& r = spec.patch_spectra[assign[cell]];
    const std::size_t x0 = (cell % spec.cols) * spec.patch_px;
    const std::size_t y0 = (cell / spec.cols) * spec.patch_px;
    for (std::size_t n = 0; n < kNumBands; ++n) {
      for (std::size_t dy = 0; dy < spec.patch_px; ++dy) {
        for (std::size_t dx = 0; dx < spec.patch_px; ++dx) {
          cube.set(n, x0 + dx, y0 + dy, r[n]);
        }
      }
    }
  }
  return cube;
}

std::vector<ManifestEntry> DatasetManifest::split(bool train) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries) {
    if (e.train == train) {
      out.push_back(e);
    }
  }
  return out;
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open: " + path, 0);
  }
  const fs::path base = fs::path(path).parent_path();

  DatasetManifest manifest;
  std::set<std::string> seen_paths;
  std::set<std::string> seen_ids;
  std::string line;
  long long offset = 0;
  while (std::getline(in, line)) {
    const long long line_at = offset;
    offset += static_cast<long long>(line.size()) + (in.eof() ? 0 : 1);
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw FormatError("expected cube_path<TAB>split in " + path, line_at);
    }
    const std::string cube = line.substr(0, tab);
    const std::string split = line.substr(tab + 1);
    if (cube.empty() || (split != "train" && split != "test")) {
      throw FormatError("split must be 'train' or 'test' in " + path, line_at);
    }
    fs::path resolved = cube;
    if (resolved.is_relative()) {
      resolved = base / resolved;
    }
    const std::string scene_id = resolved.stem().string();
    if (!seen_paths.insert(resolved.string()).second) {
      throw FormatError("duplicate cube " + cube + " in " + path, line_at);
    }
    if (!seen_ids.insert(scene_id).second) {
      throw FormatError("duplicate scene id " + scene_id + " in " + path,
                        line_at);
    }
    manifest.entries.push_back(
        {resolved.string(), scene_id, split == "train"});
  }
  return manifest;
}

HyperCube load_cube(const std::string& path) {
  if (!fs::is_directory(path)) {
    return load_cube_hsc1(path);
  }
  HyperCube cube(1, 1);
  bool sized = false;
  for (std::size_t n = 0; n < kNumBands; ++n) {
    const fs::path band_file =
        fs::path(path) /
        (std::to_string(static_cast<int>(wavelength(n))) + ".png");
    if (!fs::exists(band_file)) {
      throw FormatError("missing band file " + band_file.string(), 0);
    }
    const GrayImage16 img = load_gray_png16(band_file.string());
    if (!sized) {
      cube = HyperCube(img.width, img.height);
      sized = true;
    } else if (img.width != cube.width() || img.height != cube.height()) {
      throw FormatError("band size mismatch at " + band_file.string(), 0);
    }
    for (std::size_t y = 0; y < img.height; ++y) {
      for (std::size_t x = 0; x < img.width; ++x) {
        cube.set(n, x, y, img.pixels[y * img.width + x] / 65535.0);
      }
    }
  }
  return cube;
}

RgbImage ground_truth(const HyperCube& cube, const SpectralCurve& white_led,
                      const CameraSensitivity& camera) {
  validate_curve(white_led, "ground-truth illuminant");
  for (std::size_t n = kVisBands; n < kNumBands; ++n) {
    if (white_led[n] != 0.0) {
      throw DomainError("ground-truth illuminant must have no power at " +
                        std::to_string(wavelength(n)) + " nm");
    }
  }
  return render(cube, white_led, camera);
}

const SpectralCurve& white_led_default() {
  static const SpectralCurve curve = [] {
    const SpectralCurve blue = gaussian_curve(450.0, 25.0);
    const SpectralCurve phosphor = gaussian_curve(565.0, 120.0, 0.85);
    SpectralCurve raw;
    for (std::size_t n = 0; n < kNumBands; ++n) {
      raw[n] = blue[n] + phosphor[n];
    }
    raw = split_vis(raw);
    // A unit-reflectance surface under this light should render with its
    // brightest channel at 1.0; that anchors kappa = 1/255 in image units.
    const CameraSensitivity& cam = default_camera();
    double peak = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      peak = std::max(peak, kernels::active().dot(raw.data(),
                                                  cam.rows[c].data(),
                                                  kNumBands));
    }
    for (std::size_t n = 0; n < kNumBands; ++n) {
      raw[n] /= peak;
    }
    return raw;
  }();
  return curve;
}

const CameraSensitivity& default_camera() {
  static const CameraSensitivity cam = [] {
    SpectralCurve r = gaussian_curve(600.0, 80.0);
    SpectralCurve g = gaussian_curve(540.0, 80.0);
    SpectralCurve b = gaussian_curve(460.0, 80.0);
    for (std::size_t n = 0; n < kNumBands; ++n) {
      // Shared tail: the three channels respond identically in the NIR.
      const double tail = 0.25 * logistic((wavelength(n) - 760.0) / 30.0);
      r[n] += tail;
      g[n] += tail;
      b[n] += tail;
    }
    return CameraSensitivity(std::move(r), std::move(g), std::move(b));
  }();
  return cam;
}

}  // namespace nightspec
