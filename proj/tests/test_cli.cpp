#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "nightspec/hsc1.hpp"
#include "nightspec/imaging.hpp"
#include "oracles.hpp"

// End-to-end coverage of the command line binary: every invocation here is a
// real subprocess, so exit codes and on-disk artifacts are tested exactly as
// a user sees them.

namespace {

using nlohmann::json;

const std::string kCli = NIGHTSPEC_CLI_PATH;
const std::string kSynthgen = NIGHTSPEC_SYNTHGEN_PATH;

std::string q(const std::string& s) { return "'" + s + "'"; }

int run_cmd(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  if (status == -1 || !WIFEXITED(status)) {
    return -1;
  }
  return WEXITSTATUS(status);
}

json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return json::parse(in);
}

std::size_t count_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      ++n;
    }
  }
  return n;
}

// One dataset and one finished design run, shared across the test cases so
// each case stays fast. Built lazily by the first case that needs it.
struct CliWorld {
  oracles::TempDir dir;
  std::string data;
  std::string run1;
  std::string design_flags;

  CliWorld() {
    data = dir.str("data");
    REQUIRE(run_cmd(q(kSynthgen) + " --out " + q(data) +
                    " --train 3 --test 2 --rows 2 --cols 2 --patch 8"
                    " --seed 4") == 0);
    run1 = dir.str("run1");
    design_flags = " --manifest " + q(data + "/manifest.tsv") +
                   " --iters 6 --checkpoint-every 2"
                   " --step-size 0.05 --batch 2";
    REQUIRE(run_cmd(q(kCli) + " design" + design_flags + " --seed 11" +
                    " --out " + q(run1)) == 0);
  }

  static const CliWorld& get() {
    static CliWorld world;
    return world;
  }
};

}  // namespace

TEST_CASE("usage errors exit with 2 and help with 0") {
  CHECK(run_cmd(q(kCli)) == 2);
  CHECK(run_cmd(q(kCli) + " --help") == 0);
  CHECK(run_cmd(q(kCli) + " design --help") == 0);
  CHECK(run_cmd(q(kCli) + " no-such-command") == 2);
  CHECK(run_cmd(q(kCli) + " design --out /tmp/x") == 2);  // missing manifest
  CHECK(run_cmd(q(kCli) + " design --manifest missing.tsv --out /tmp/x"
                          " --unknown-flag") == 2);
}

TEST_CASE("the dataset generator writes a loadable corpus") {
  const CliWorld& w = CliWorld::get();
  namespace fs = std::filesystem;
  CHECK(fs::exists(w.data + "/manifest.tsv"));
  CHECK(count_lines(w.data + "/manifest.tsv") == 5);
  for (int i = 0; i < 5; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "/scene_%02d.hsc1", i);
    CHECK(fs::exists(w.data + name));
  }
  CHECK(run_cmd(q(kSynthgen) + " --out " + q(w.dir.str("empty")) +
                " --train 0 --test 1") == 2);
}

TEST_CASE("a design run leaves a complete, replayable record") {
  const CliWorld& w = CliWorld::get();
  namespace fs = std::filesystem;
  CHECK(fs::exists(w.run1 + "/config.json"));
  CHECK(fs::exists(w.run1 + "/curve.csv"));
  CHECK(fs::exists(w.run1 + "/sigma.json"));
  // iters 6, checkpoints every 2, plus the forced final record.
  CHECK(count_lines(w.run1 + "/trace.jsonl") == 4);

  const json sigma = read_json(w.run1 + "/sigma.json");
  CHECK(sigma.at("logits").size() == 26);
  CHECK(sigma.at("sigma").size() == 26);
  CHECK(sigma.at("sigma_hat").size() == 26);
  const double xi = sigma.at("xi").get<double>();
  CHECK(xi > 0.0);
  CHECK(xi <= 1.0);
  CHECK(sigma.at("psi_after").get<double>() <= 10.0 * (1.0 + 1e-9));
  CHECK(std::isfinite(sigma.at("loss").get<double>()));

  const json config = read_json(w.run1 + "/config.json");
  CHECK(config.at("iters").get<int>() == 6);
  CHECK(config.at("seed").get<std::uint64_t>() == 11);

  // Same flags, fresh directory: byte-identical curve.
  const std::string run2 = w.dir.str("run2");
  REQUIRE(run_cmd(q(kCli) + " design" + w.design_flags + " --seed 11" +
                  " --out " + q(run2)) == 0);
  CHECK(oracles::read_bytes(run2 + "/curve.csv") ==
        oracles::read_bytes(w.run1 + "/curve.csv"));
  CHECK(oracles::read_bytes(run2 + "/trace.jsonl") ==
        oracles::read_bytes(w.run1 + "/trace.jsonl"));

  // Replaying the recorded config reproduces the run without the flags.
  const std::string run3 = w.dir.str("run3");
  REQUIRE(run_cmd(q(kCli) + " design --manifest " +
                  q(w.data + "/manifest.tsv") + " --config " +
                  q(w.run1 + "/config.json") + " --out " + q(run3)) == 0);
  CHECK(oracles::read_bytes(run3 + "/curve.csv") ==
        oracles::read_bytes(w.run1 + "/curve.csv"));

  // A different seed must actually change the outcome.
  const std::string run4 = w.dir.str("run4");
  REQUIRE(run_cmd(q(kCli) + " design" + w.design_flags + " --seed 12" +
                  " --out " + q(run4)) == 0);
  CHECK(oracles::read_bytes(run4 + "/trace.jsonl") !=
        oracles::read_bytes(w.run1 + "/trace.jsonl"));
}

TEST_CASE("the kernel override is honored and validated") {
  const CliWorld& w = CliWorld::get();
  // Forcing the reference kernels must not change a single byte.
  const std::string run_s = w.dir.str("run_scalar");
  REQUIRE(run_cmd("NIGHTSPEC_KERNELS=scalar " + q(kCli) + " design" +
                  w.design_flags + " --seed 11 --out " + q(run_s)) == 0);
  CHECK(oracles::read_bytes(run_s + "/curve.csv") ==
        oracles::read_bytes(w.run1 + "/curve.csv"));
  CHECK(oracles::read_bytes(run_s + "/trace.jsonl") ==
        oracles::read_bytes(w.run1 + "/trace.jsonl"));

  CHECK(run_cmd("NIGHTSPEC_KERNELS=quantum " + q(kCli) + " design" +
                w.design_flags + " --out " + q(w.dir.str("run_bogus"))) == 2);
}

TEST_CASE("broken inputs are reported as usage failures") {
  const CliWorld& w = CliWorld::get();
  const std::string bad_json = w.dir.str("bad.json");
  {
    std::ofstream out(bad_json);
    out << "{ this is not json";
  }
  CHECK(run_cmd(q(kCli) + " design" + w.design_flags + " --config " +
                q(bad_json) + " --out " + q(w.dir.str("x1"))) == 2);

  const std::string unknown_key = w.dir.str("unknown_key.json");
  {
    std::ofstream out(unknown_key);
    out << "{\"itters\": 5}";
  }
  CHECK(run_cmd(q(kCli) + " design" + w.design_flags + " --config " +
                q(unknown_key) + " --out " + q(w.dir.str("x2"))) == 2);

  const std::string bad_csv = w.dir.str("bad.csv");
  {
    std::ofstream out(bad_csv);
    out << "wavelength_nm,value\n420,-1\n";
  }
  CHECK(run_cmd(q(kCli) + " realize --target " + q(bad_csv) + " --out " +
                q(w.dir.str("x3"))) == 2);
  CHECK(run_cmd(q(kCli) + " design" + w.design_flags + " --bank " +
                q(bad_csv) + " --out " + q(w.dir.str("x4"))) == 2);
  // Out-of-range config values share the same exit class.
  CHECK(run_cmd(q(kCli) + " design" + w.design_flags + " --psi-hat -1" +
                " --out " + q(w.dir.str("x5"))) == 2);
}

TEST_CASE("simulate writes captures that repeat only with the seed") {
  const CliWorld& w = CliWorld::get();
  namespace fs = std::filesystem;
  const std::string sim1 = w.dir.str("sim1");
  const std::string base = q(kCli) + " simulate --cube " +
                           q(w.data + "/scene_00.hsc1") + " --spectrum " +
                           q(w.run1 + "/curve.csv");
  REQUIRE(run_cmd(base + " --seed 3 --out " + q(sim1)) == 0);
  for (const char* name :
       {"vis.f32", "nir.f32", "gt.f32", "vis.png", "nir.png", "gt.png",
        "vis_noisy.f32", "nir_noisy.f32", "vis_noisy.png", "nir_noisy.png",
        "meta.json"}) {
    CHECK(fs::exists(sim1 + "/" + name));
  }
  const json meta = read_json(sim1 + "/meta.json");
  CHECK(meta.at("width").get<int>() == 16);
  CHECK(meta.at("height").get<int>() == 16);
  CHECK(meta.at("noise").get<bool>());

  const std::string sim2 = w.dir.str("sim2");
  REQUIRE(run_cmd(base + " --seed 3 --out " + q(sim2)) == 0);
  CHECK(oracles::read_bytes(sim2 + "/vis_noisy.f32") ==
        oracles::read_bytes(sim1 + "/vis_noisy.f32"));

  const std::string sim3 = w.dir.str("sim3");
  REQUIRE(run_cmd(base + " --seed 4 --out " + q(sim3)) == 0);
  CHECK(oracles::read_bytes(sim3 + "/vis_noisy.f32") !=
        oracles::read_bytes(sim1 + "/vis_noisy.f32"));
  // The noise-free planes do not depend on the seed at all.
  CHECK(oracles::read_bytes(sim3 + "/vis.f32") ==
        oracles::read_bytes(sim1 + "/vis.f32"));

  const std::string sim4 = w.dir.str("sim4");
  REQUIRE(run_cmd(base + " --no-noise --out " + q(sim4)) == 0);
  CHECK(!fs::exists(sim4 + "/vis_noisy.f32"));
  CHECK(!read_json(sim4 + "/meta.json").at("noise").get<bool>());
}

TEST_CASE("evaluate scores the held-out scenes") {
  const CliWorld& w = CliWorld::get();
  const std::string eval1 = w.dir.str("eval1");
  REQUIRE(run_cmd(q(kCli) + " evaluate --manifest " +
                  q(w.data + "/manifest.tsv") + " --spectrum " +
                  q(w.run1 + "/curve.csv") + " --seed 5 --out " +
                  q(eval1)) == 0);
  const json report = read_json(eval1 + "/report.json");
  CHECK(report.at("train_count").get<int>() == 3);
  CHECK(report.at("test_count").get<int>() == 2);
  CHECK(report.at("scenes").size() == 2);
  CHECK(report.at("model").size() == 21);
  for (const json& scene : report.at("scenes")) {
    CHECK(scene.at("mse").get<double>() >= 0.0);
    CHECK(scene.at("ssim").get<double>() <= 1.0);
    CHECK(std::isfinite(scene.at("psnr").get<double>()));
  }
  const double mean_mse = report.at("mean_mse").get<double>();
  double sum = 0.0;
  for (const json& scene : report.at("scenes")) {
    sum += scene.at("mse").get<double>();
  }
  CHECK(mean_mse == doctest::Approx(sum / 2.0).epsilon(1e-12));

  const std::string eval2 = w.dir.str("eval2");
  REQUIRE(run_cmd(q(kCli) + " evaluate --manifest " +
                  q(w.data + "/manifest.tsv") + " --spectrum " +
                  q(w.run1 + "/curve.csv") + " --seed 5 --out " +
                  q(eval2)) == 0);
  CHECK(oracles::read_bytes(eval2 + "/report.json") ==
        oracles::read_bytes(eval1 + "/report.json"));
}

TEST_CASE("a singular fit exits with the numeric failure code") {
  // Constant scenes leave the normal matrix rank one; without noise and
  // without a ridge the solve must refuse, and the CLI maps that to 3.
  const CliWorld& w = CliWorld::get();
  const std::string flat_dir = w.dir.str("flat");
  std::filesystem::create_directories(flat_dir);
  nightspec::HyperCube flat(12, 12);
  for (std::size_t n = 0; n < nightspec::kNumBands; ++n) {
    for (std::size_t y = 0; y < 12; ++y) {
      for (std::size_t x = 0; x < 12; ++x) {
        flat.set(n, x, y, 0.4);
      }
    }
  }
  nightspec::save_cube(flat_dir + "/a.hsc1", flat);
  nightspec::save_cube(flat_dir + "/b.hsc1", flat);
  {
    std::ofstream out(flat_dir + "/manifest.tsv");
    out << "a.hsc1\ttrain\nb.hsc1\ttest\n";
  }
  CHECK(run_cmd(q(kCli) + " evaluate --manifest " +
                q(flat_dir + "/manifest.tsv") + " --spectrum " +
                q(w.run1 + "/curve.csv") + " --no-noise --ridge 0 --out " +
                q(w.dir.str("eval_flat"))) == 3);
}

TEST_CASE("realize reports a sparse non-negative approximation") {
  const CliWorld& w = CliWorld::get();
  const std::string fitdir = w.dir.str("fit1");
  REQUIRE(run_cmd(q(kCli) + " realize --target " + q(w.run1 + "/curve.csv") +
                  " --max-active 5 --out " + q(fitdir)) == 0);
  const json fit = read_json(fitdir + "/fit.json");
  CHECK(fit.at("weights").size() == 26);
  const auto active = fit.at("active_count").get<std::size_t>();
  CHECK(active <= 5);
  CHECK(fit.at("active_indices").size() == active);
  for (const json& v : fit.at("weights")) {
    CHECK(v.get<double>() >= 0.0);
  }
  CHECK(std::isfinite(fit.at("residual_l2").get<double>()));
  // The fitted curve is a valid spectrum table with one row per band.
  CHECK(count_lines(fitdir + "/fitted_curve.csv") == 49);

  // Zero means no cap; the uncapped fit can only be at least as tight.
  const std::string uncapped = w.dir.str("fit0");
  REQUIRE(run_cmd(q(kCli) + " realize --target " + q(w.run1 + "/curve.csv") +
                  " --max-active 0 --out " + q(uncapped)) == 0);
  const json free_fit = read_json(uncapped + "/fit.json");
  CHECK(free_fit.at("residual_l2").get<double>() <=
        fit.at("residual_l2").get<double>() + 1e-12);
  // A negative cap cannot be parsed into the option at all.
  CHECK(run_cmd(q(kCli) + " realize --target " + q(w.run1 + "/curve.csv") +
                " --max-active -2 --out " + q(w.dir.str("fitneg"))) == 2);
}
