// Writes a small synthetic dataset: shuffled patch-grid scenes as .hsc1
// cubes plus the manifest that the design and evaluate commands consume.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "nightspec/dataset.hpp"
#include "nightspec/errors.hpp"
#include "nightspec/hsc1.hpp"
#include "nightspec/rng.hpp"
#include "nightspec/spectra.hpp"

namespace fs = std::filesystem;
using namespace nightspec;

namespace {

std::vector<SpectralCurve> reflectance_pool() {
  const auto nir_pair = metamer_nir_differs();
  std::vector<SpectralCurve> pool;
  pool.push_back(reflect_flat(0.18));
  pool.push_back(reflect_flat(0.5));
  pool.push_back(reflect_bump(470.0, 60.0, 0.6, 0.05));
  pool.push_back(reflect_bump(540.0, 90.0, 0.5, 0.1));
  pool.push_back(reflect_bump(610.0, 60.0, 0.6, 0.05));
  pool.push_back(reflect_bump(750.0, 80.0, 0.5, 0.1));
  pool.push_back(reflect_ramp(0.1, 0.7));
  pool.push_back(reflect_ramp(0.6, 0.2));
  pool.push_back(nir_pair.first);
  pool.push_back(nir_pair.second);
  return pool;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"generate a synthetic patch-grid dataset"};
  std::string out_dir;
  std::size_t n_train = 6, n_test = 2, rows = 2, cols = 2, patch = 8;
  std::uint64_t seed = 0;
  app.add_option("--out", out_dir, "output directory")->required();
  app.add_option("--train", n_train, "number of train scenes");
  app.add_option("--test", n_test, "number of test scenes");
  app.add_option("--rows", rows, "patch rows per scene");
  app.add_option("--cols", cols, "patch columns per scene");
  app.add_option("--patch", patch, "patch side in pixels");
  app.add_option("--seed", seed, "RNG seed");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (n_train == 0) {
      throw DomainError("need at least one train scene");
    }
    const std::vector<SpectralCurve> pool = reflectance_pool();
    fs::create_directories(out_dir);
    std::ofstream manifest(fs::path(out_dir) / "manifest.tsv",
                           std::ios::binary);
    if (!manifest) {
      throw FormatError("cannot write " + out_dir + "/manifest.tsv");
    }

    const std::size_t total = n_train + n_test;
    for (std::size_t i = 0; i < total; ++i) {
      SceneSpec spec;
      spec.rows = rows;
      spec.cols = cols;
      spec.patch_px = patch;
      spec.seed = derive_stream(seed, kTagScene, i);
      // Rotate through the pool so scenes differ in content, not just layout.
      for (std::size_t j = 0; j < rows * cols; ++j) {
        spec.patch_spectra.push_back(pool[(i + j) % pool.size()]);
      }
      char name[32];
      std::snprintf(name, sizeof(name), "scene_%02zu.hsc1", i);
      save_cube((fs::path(out_dir) / name).string(), synth_scene(spec));
      manifest << name << "\t" << (i < n_train ? "train" : "test") << "\n";
    }
    manifest.flush();
    if (!manifest) {
      throw FormatError("cannot write " + out_dir + "/manifest.tsv");
    }
    std::cout << "synthgen: " << n_train << " train + " << n_test
              << " test scenes (" << cols * patch << "x" << rows * patch
              << ") in " << out_dir << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
