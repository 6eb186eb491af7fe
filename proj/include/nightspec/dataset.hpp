#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nightspec/imaging.hpp"

namespace nightspec {

// Analytic reflectances for synthetic scenes, all in [0,1] per band.
SpectralCurve reflect_flat(double value);
SpectralCurve reflect_bump(double center_nm, double fwhm_nm, double amplitude,
                           double floor = 0.0);
SpectralCurve reflect_ramp(double start_value, double end_value);

// Pair that agrees bit-for-bit on the VIS bands and separates only in NIR:
// the ambiguity that makes NIR-to-color translation ill-posed.
std::pair<SpectralCurve, SpectralCurve> metamer_nir_differs();

// The reverse pair: identical NIR reflectance, different visible color. Under
// a pure-NIR illuminant the two render identically yet have different ground
// truth, which lower-bounds any per-pixel restoration.
std::pair<SpectralCurve, SpectralCurve> metamer_vis_differs();

// rows x cols grid of square patches, each spatially constant. The seed
// shuffles which spectrum lands on which cell (spectra repeat in cycle when
// there are more cells than spectra).
struct SceneSpec {
  std::size_t rows = 1;
  std::size_t cols = 1;
  std::size_t patch_px = 8;
  std::vector<SpectralCurve> patch_spectra;
  std::uint64_t seed = 0;
};

HyperCube synth_scene(const SceneSpec& spec);

struct ManifestEntry {
  std::string cube_path;  // resolved against the manifest's directory
  std::string scene_id;   // file stem
  bool train = true;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  std::vector<ManifestEntry> split(bool train) const;
};

// Line format: cube_path<TAB>split, split in {train, test}. Duplicate paths
// or scene ids are rejected, which keeps the two splits disjoint.
DatasetManifest load_manifest(const std::string& path);

// HSC1 file, or a directory holding 420.png .. 890.png 16-bit grayscale
// planes scaled as value/65535.
HyperCube load_cube(const std::string& path);

// Noise-free render under the white reference light. The illuminant must
// have no NIR support, so the result only sees VIS reflectance.
RgbImage ground_truth(const HyperCube& cube, const SpectralCurve& white_led,
                      const CameraSensitivity& camera);

// Two-lobe white LED (blue peak plus broad phosphor), zero at 700 nm and
// above, scaled so a unit-reflectance surface renders with peak channel 1.
const SpectralCurve& white_led_default();

// Gaussian R/G/B sensitivities plus one shared NIR tail, so the channels
// coincide in the NIR the way commodity sensors do.
const CameraSensitivity& default_camera();

}  // namespace nightspec
