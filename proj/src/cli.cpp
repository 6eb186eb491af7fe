#include "nightspec/cli.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "nightspec/csv_io.hpp"
#include "nightspec/dataset.hpp"
#include "nightspec/errors.hpp"
#include "nightspec/image_io.hpp"
#include "nightspec/imaging.hpp"
#include "nightspec/optimizer.hpp"
#include "nightspec/realize.hpp"
#include "nightspec/restore.hpp"
#include "nightspec/rng.hpp"
#include "nightspec/spectra.hpp"

namespace nightspec {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json config_to_json(const DesignConfig& c) {
  return json{
      {"psi_hat", c.psi_hat},
      {"epsilon", c.epsilon},
      {"iters", c.iters},
      {"step_size", c.step_size},
      {"decay_every", c.decay_every},
      {"decay_factor", c.decay_factor},
      {"batch", c.batch},
      {"grad_mode",
       c.grad_mode == GradMode::kFiniteDifference ? "fd" : "analytic"},
      {"fd_step", c.fd_step},
      {"seed", c.seed},
      {"noise", c.noise},
      {"kappa", c.kappa},
      {"noise_stddev", c.noise_stddev},
      {"ridge", c.ridge},
      {"checkpoint_every", c.checkpoint_every},
      {"threads", c.threads},
      {"adam_beta1", c.adam_beta1},
      {"adam_beta2", c.adam_beta2},
  };
}

void config_from_json(const json& j, DesignConfig& c) {
  if (!j.is_object()) {
    throw DomainError("config: top level must be a JSON object");
  }
  static const std::set<std::string> known = {
      "psi_hat",      "epsilon",     "iters",       "step_size",
      "decay_every",  "decay_factor", "batch",      "grad_mode",
      "fd_step",      "seed",        "noise",       "kappa",
      "noise_stddev", "ridge",       "checkpoint_every", "threads",
      "adam_beta1",   "adam_beta2"};
  for (const auto& item : j.items()) {
    if (known.find(item.key()) == known.end()) {
      throw DomainError("config: unknown key \"" + item.key() + "\"");
    }
  }
  if (j.contains("psi_hat")) c.psi_hat = j.at("psi_hat").get<double>();
  if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
  if (j.contains("iters")) c.iters = j.at("iters").get<int>();
  if (j.contains("step_size")) c.step_size = j.at("step_size").get<double>();
  if (j.contains("decay_every")) c.decay_every = j.at("decay_every").get<int>();
  if (j.contains("decay_factor")) {
    c.decay_factor = j.at("decay_factor").get<double>();
  }
  if (j.contains("batch")) c.batch = j.at("batch").get<int>();
  if (j.contains("grad_mode")) {
    const auto mode = j.at("grad_mode").get<std::string>();
    if (mode == "analytic") {
      c.grad_mode = GradMode::kAnalyticNoiseFree;
    } else if (mode == "fd") {
      c.grad_mode = GradMode::kFiniteDifference;
    } else {
      throw DomainError("config: grad_mode must be \"analytic\" or \"fd\"");
    }
  }
  if (j.contains("fd_step")) c.fd_step = j.at("fd_step").get<double>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("noise")) c.noise = j.at("noise").get<bool>();
  if (j.contains("kappa")) c.kappa = j.at("kappa").get<double>();
  if (j.contains("noise_stddev")) {
    c.noise_stddev = j.at("noise_stddev").get<double>();
  }
  if (j.contains("ridge")) c.ridge = j.at("ridge").get<double>();
  if (j.contains("checkpoint_every")) {
    c.checkpoint_every = j.at("checkpoint_every").get<int>();
  }
  if (j.contains("threads")) c.threads = j.at("threads").get<int>();
  if (j.contains("adam_beta1")) c.adam_beta1 = j.at("adam_beta1").get<double>();
  if (j.contains("adam_beta2")) c.adam_beta2 = j.at("adam_beta2").get<double>();
}

json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open " + path);
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what(),
                      static_cast<long long>(e.byte) - 1);
  }
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << "\n";
  if (!out) {
    throw FormatError("cannot write " + path.string());
  }
}

LedBank load_bank(const std::string& path) {
  if (path.empty()) {
    return default_led_bank();
  }
  return load_bank_csv(path, standard_luminosity().scotopic);
}

CameraSensitivity load_camera(const std::string& path) {
  if (path.empty()) {
    return default_camera();
  }
  return load_camera_csv(path);
}

SpectralCurve nir_part(const SpectralCurve& spectrum) {
  const SpectralCurve vis = split_vis(spectrum);
  SpectralCurve nir;
  for (std::size_t n = 0; n < kNumBands; ++n) {
    nir[n] = spectrum[n] - vis[n];
  }
  return nir;
}

// ---- design ----------------------------------------------------------

struct DesignArgs {
  std::string manifest;
  std::string out_dir;
  std::string config_path;
  std::string bank_path;
  std::string camera_path;
  DesignConfig flags;
  std::string grad_mode = "analytic";
  bool no_noise = false;
};

void run_design(const DesignArgs& args, const CLI::App& sub) {
  DesignConfig cfg;
  if (!args.config_path.empty()) {
    config_from_json(load_json_file(args.config_path), cfg);
  }
  // Flags given on the command line override the config file.
  const auto have = [&sub](const std::string& name) {
    return sub.count(name) > 0;
  };
  if (have("--psi-hat")) cfg.psi_hat = args.flags.psi_hat;
  if (have("--epsilon")) cfg.epsilon = args.flags.epsilon;
  if (have("--iters")) cfg.iters = args.flags.iters;
  if (have("--step-size")) cfg.step_size = args.flags.step_size;
  if (have("--decay-every")) cfg.decay_every = args.flags.decay_every;
  if (have("--decay-factor")) cfg.decay_factor = args.flags.decay_factor;
  if (have("--batch")) cfg.batch = args.flags.batch;
  if (have("--grad-mode")) {
    cfg.grad_mode = args.grad_mode == "fd" ? GradMode::kFiniteDifference
                                           : GradMode::kAnalyticNoiseFree;
  }
  if (have("--fd-step")) cfg.fd_step = args.flags.fd_step;
  if (have("--seed")) cfg.seed = args.flags.seed;
  if (have("--no-noise")) cfg.noise = false;
  if (have("--kappa")) cfg.kappa = args.flags.kappa;
  if (have("--noise-stddev")) cfg.noise_stddev = args.flags.noise_stddev;
  if (have("--ridge")) cfg.ridge = args.flags.ridge;
  if (have("--checkpoint-every")) {
    cfg.checkpoint_every = args.flags.checkpoint_every;
  }
  if (have("--threads")) cfg.threads = args.flags.threads;
  validate_config(cfg);

  const LedBank bank = load_bank(args.bank_path);
  const CameraSensitivity camera = load_camera(args.camera_path);
  const DatasetManifest manifest = load_manifest(args.manifest);

  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);
  // The effective config goes out first so an aborted run can be replayed.
  write_json_file(out / "config.json", config_to_json(cfg));

  std::ofstream trace(out / "trace.jsonl", std::ios::binary);
  if (!trace) {
    throw FormatError("cannot write " + (out / "trace.jsonl").string());
  }
  const CheckpointFn on_checkpoint = [&trace](const TraceRecord& rec) {
    const json j{{"iteration", rec.iteration}, {"sigma", rec.sigma},
                 {"xi", rec.xi},               {"psi_after", rec.psi_after},
                 {"loss", rec.loss},           {"best_loss", rec.best_loss}};
    trace << j.dump() << "\n";
    trace.flush();
  };

  const DesignResult result =
      design_spectrum(manifest, bank, camera, standard_luminosity().scotopic,
                      white_led_default(), cfg, on_checkpoint);

  save_spectrum_csv((out / "curve.csv").string(), result.curve);
  write_json_file(out / "sigma.json",
                  json{{"logits", result.logits},
                       {"sigma", result.sigma},
                       {"sigma_hat", result.sigma_hat},
                       {"xi", result.xi},
                       {"psi_after", result.psi_after},
                       {"loss", result.loss}});
  std::cout << "design: loss " << result.loss << ", xi " << result.xi
            << ", psi_after " << result.psi_after << "\n";
}

void add_design(CLI::App& app) {
  auto args = std::make_shared<DesignArgs>();
  CLI::App* sub = app.add_subcommand(
      "design", "optimize an illumination spectrum over a training set");
  sub->add_option("--manifest", args->manifest, "dataset manifest (TSV)")
      ->required();
  sub->add_option("--out", args->out_dir, "output directory")->required();
  sub->add_option("--config", args->config_path,
                  "JSON config; explicit flags override its fields");
  sub->add_option("--bank", args->bank_path,
                  "LED bank CSV (default: built-in bank)");
  sub->add_option("--camera", args->camera_path,
                  "camera sensitivity CSV (default: built-in)");
  sub->add_option("--psi-hat", args->flags.psi_hat, "visibility budget");
  sub->add_option("--epsilon", args->flags.epsilon, "projection epsilon");
  sub->add_option("--iters", args->flags.iters, "iteration count");
  sub->add_option("--step-size", args->flags.step_size, "initial step size");
  sub->add_option("--decay-every", args->flags.decay_every,
                  "iterations between step-size decays");
  sub->add_option("--decay-factor", args->flags.decay_factor,
                  "step-size decay factor");
  sub->add_option("--batch", args->flags.batch, "scenes per iteration");
  sub->add_option("--grad-mode", args->grad_mode, "analytic|fd")
      ->check(CLI::IsMember({"analytic", "fd"}));
  sub->add_option("--fd-step", args->flags.fd_step, "finite-difference step");
  sub->add_option("--seed", args->flags.seed, "RNG seed");
  sub->add_flag("--no-noise", args->no_noise,
                "evaluate the objective without sensor noise");
  sub->add_option("--kappa", args->flags.kappa,
                  "intensity quantum per photon count");
  sub->add_option("--noise-stddev", args->flags.noise_stddev,
                  "additive pattern noise stddev");
  sub->add_option("--ridge", args->flags.ridge, "reconstructor ridge");
  sub->add_option("--checkpoint-every", args->flags.checkpoint_every,
                  "iterations between trace records");
  sub->add_option("--threads", args->flags.threads, "noise worker threads");
  sub->callback([args, sub]() { run_design(*args, *sub); });
}

// ---- simulate --------------------------------------------------------

struct SimulateArgs {
  std::string cube;
  std::string spectrum;
  std::string out_dir;
  std::string camera_path;
  double xi_vis = 1.0;
  double xi_nir = 1.0;
  std::uint64_t seed = 0;
  double kappa = 1.0 / 255.0;
  double noise_stddev = 0.0;
  bool no_noise = false;
  int threads = 1;
};

void run_simulate(const SimulateArgs& args) {
  const HyperCube cube = load_cube(args.cube);
  const SpectralCurve spectrum = load_spectrum_csv(args.spectrum);
  const CameraSensitivity camera = load_camera(args.camera_path);

  const RgbImage vis = render(cube, split_vis(spectrum), camera);
  const RgbImage nir = render(cube, nir_part(spectrum), camera);
  const RgbImage gt = ground_truth(cube, white_led_default(), camera);

  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);
  save_rgb_f32((out / "vis.f32").string(), vis);
  save_rgb_f32((out / "nir.f32").string(), nir);
  save_rgb_f32((out / "gt.f32").string(), gt);
  save_rgb_png16((out / "vis.png").string(), vis);
  save_rgb_png16((out / "nir.png").string(), nir);
  save_rgb_png16((out / "gt.png").string(), gt);

  if (!args.no_noise) {
    NoiseModel model;
    model.kappa = args.kappa;
    model.pattern_stddev = args.noise_stddev;
    model.seed = derive_stream(args.seed, kTagIterNoise, 0, 0, 0);
    const RgbImage vis_noisy = add_noise(vis, args.xi_vis, model, args.threads);
    model.seed = derive_stream(args.seed, kTagIterNoise, 0, 0, 1);
    const RgbImage nir_noisy = add_noise(nir, args.xi_nir, model, args.threads);
    save_rgb_f32((out / "vis_noisy.f32").string(), vis_noisy);
    save_rgb_f32((out / "nir_noisy.f32").string(), nir_noisy);
    save_rgb_png16((out / "vis_noisy.png").string(), vis_noisy);
    save_rgb_png16((out / "nir_noisy.png").string(), nir_noisy);
  }

  write_json_file(out / "meta.json",
                  json{{"width", cube.width()},
                       {"height", cube.height()},
                       {"xi_vis", args.xi_vis},
                       {"xi_nir", args.xi_nir},
                       {"noise", !args.no_noise},
                       {"seed", args.seed},
                       {"kappa", args.kappa},
                       {"noise_stddev", args.noise_stddev}});
}

void add_simulate(CLI::App& app) {
  auto args = std::make_shared<SimulateArgs>();
  CLI::App* sub = app.add_subcommand(
      "simulate", "render one scene's captures under a given spectrum");
  sub->add_option("--cube", args->cube, "scene cube (.hsc1 or band directory)")
      ->required();
  sub->add_option("--spectrum", args->spectrum, "spectrum CSV")->required();
  sub->add_option("--out", args->out_dir, "output directory")->required();
  sub->add_option("--camera", args->camera_path,
                  "camera sensitivity CSV (default: built-in)");
  sub->add_option("--xi-vis", args->xi_vis,
                  "intensity scale the VIS capture was dimmed by");
  sub->add_option("--xi-nir", args->xi_nir,
                  "intensity scale the NIR capture was dimmed by");
  sub->add_option("--seed", args->seed, "RNG seed");
  sub->add_option("--kappa", args->kappa,
                  "intensity quantum per photon count");
  sub->add_option("--noise-stddev", args->noise_stddev,
                  "additive pattern noise stddev");
  sub->add_flag("--no-noise", args->no_noise, "skip the noisy captures");
  sub->add_option("--threads", args->threads, "noise worker threads");
  sub->callback([args]() { run_simulate(*args); });
}

// ---- evaluate --------------------------------------------------------

struct EvaluateArgs {
  std::string manifest;
  std::string spectrum;
  std::string out_dir;
  std::string camera_path;
  double ridge = 1e-6;
  std::uint64_t seed = 0;
  double kappa = 1.0 / 255.0;
  double noise_stddev = 0.0;
  bool no_noise = false;
  int threads = 1;
};

void run_evaluate(const EvaluateArgs& args) {
  const DatasetManifest manifest = load_manifest(args.manifest);
  const SpectralCurve spectrum = load_spectrum_csv(args.spectrum);
  const CameraSensitivity camera = load_camera(args.camera_path);
  const SpectralCurve& white = white_led_default();
  const SpectralCurve phi_vis = split_vis(spectrum);
  const SpectralCurve phi_nir = nir_part(spectrum);

  struct TestSample {
    std::string scene_id;
    RgbImage vis, nir, gt;
  };
  FitAccumulator acc;
  std::size_t train_count = 0;
  std::vector<TestSample> tests;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const ManifestEntry& entry = manifest.entries[i];
    const HyperCube cube = load_cube(entry.cube_path);
    RgbImage vis = render(cube, phi_vis, camera);
    RgbImage nir = render(cube, phi_nir, camera);
    if (!args.no_noise) {
      // The spectrum under test is already the dimmed one, so the capture
      // intensity is taken at face value (no extra scale inside the noise).
      NoiseModel model;
      model.kappa = args.kappa;
      model.pattern_stddev = args.noise_stddev;
      model.seed = derive_stream(args.seed, kTagIterNoise, 0, i, 0);
      vis = add_noise(vis, 1.0, model, args.threads);
      model.seed = derive_stream(args.seed, kTagIterNoise, 0, i, 1);
      nir = add_noise(nir, 1.0, model, args.threads);
    }
    RgbImage gt = ground_truth(cube, white, camera);
    if (entry.train) {
      acc.add(vis, nir, gt);
      ++train_count;
    } else {
      tests.push_back(TestSample{entry.scene_id, std::move(vis),
                                 std::move(nir), std::move(gt)});
    }
  }
  if (train_count == 0) {
    throw DomainError("manifest has no train entries");
  }
  if (tests.empty()) {
    throw DomainError("manifest has no test entries");
  }
  const LinearReconstructor model = acc.solve(args.ridge);

  json scenes = json::array();
  double sum_mse = 0.0, sum_psnr = 0.0, sum_ssim = 0.0;
  for (const TestSample& t : tests) {
    const RgbImage x = apply_reconstructor(model, t.vis, t.nir);
    const double m = mse_loss(x, t.gt);
    const double p = psnr(x, t.gt);
    const double s = ssim(x, t.gt);
    scenes.push_back(json{
        {"scene_id", t.scene_id}, {"mse", m}, {"psnr", p}, {"ssim", s}});
    sum_mse += m;
    sum_psnr += p;
    sum_ssim += s;
  }
  const auto n = static_cast<double>(tests.size());

  fs::create_directories(args.out_dir);
  write_json_file(
      fs::path(args.out_dir) / "report.json",
      json{{"train_count", train_count},
           {"test_count", tests.size()},
           {"ridge", args.ridge},
           {"noise", !args.no_noise},
           {"model", std::vector<double>(model.m.begin(), model.m.end())},
           {"scenes", scenes},
           {"mean_mse", sum_mse / n},
           {"mean_psnr", sum_psnr / n},
           {"mean_ssim", sum_ssim / n}});
  std::cout << "evaluate: " << tests.size() << " test scenes, mean mse "
            << sum_mse / n << ", mean psnr " << sum_psnr / n
            << ", mean ssim " << sum_ssim / n << "\n";
}

void add_evaluate(CLI::App& app) {
  auto args = std::make_shared<EvaluateArgs>();
  CLI::App* sub = app.add_subcommand(
      "evaluate",
      "fit a reconstructor on the train split and score the test split");
  sub->add_option("--manifest", args->manifest, "dataset manifest (TSV)")
      ->required();
  sub->add_option("--spectrum", args->spectrum, "spectrum CSV")->required();
  sub->add_option("--out", args->out_dir, "output directory")->required();
  sub->add_option("--camera", args->camera_path,
                  "camera sensitivity CSV (default: built-in)");
  sub->add_option("--ridge", args->ridge, "reconstructor ridge");
  sub->add_option("--seed", args->seed, "RNG seed");
  sub->add_option("--kappa", args->kappa,
                  "intensity quantum per photon count");
  sub->add_option("--noise-stddev", args->noise_stddev,
                  "additive pattern noise stddev");
  sub->add_flag("--no-noise", args->no_noise, "score noise-free captures");
  sub->add_option("--threads", args->threads, "noise worker threads");
  sub->callback([args]() { run_evaluate(*args); });
}

// ---- realize ---------------------------------------------------------

struct RealizeArgs {
  std::string target;
  std::string bank_path;
  std::string out_dir;
  std::size_t max_active = 0;
};

void run_realize(const RealizeArgs& args) {
  const SpectralCurve target = load_spectrum_csv(args.target);
  const LedBank bank = load_bank(args.bank_path);
  std::optional<std::size_t> cap;
  if (args.max_active > 0) {
    cap = args.max_active;
  }
  const RealizationFit fit = fit_nnls(target, bank, cap);
  const SpectralCurve fitted = multiplex(bank, fit.weights);

  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);
  save_spectrum_csv((out / "fitted_curve.csv").string(), fitted);
  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < fit.weights.size(); ++k) {
    if (fit.weights[k] > 1e-10) {
      active.push_back(k);
    }
  }
  write_json_file(out / "fit.json", json{{"weights", fit.weights},
                                         {"residual_l2", fit.residual_l2},
                                         {"active_count", fit.active_count},
                                         {"active_indices", active}});
  std::cout << "realize: residual " << fit.residual_l2 << " with "
            << fit.active_count << " active bases\n";
}

void add_realize(CLI::App& app) {
  auto args = std::make_shared<RealizeArgs>();
  CLI::App* sub = app.add_subcommand(
      "realize", "fit a target spectrum with non-negative bank weights");
  sub->add_option("--target", args->target, "target spectrum CSV")
      ->required();
  sub->add_option("--out", args->out_dir, "output directory")->required();
  sub->add_option("--bank", args->bank_path,
                  "LED bank CSV (default: built-in bank)");
  sub->add_option("--max-active", args->max_active,
                  "cap on simultaneously lit bases (0 = no cap)");
  sub->callback([args]() { run_realize(*args); });
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"wide-band illumination design for seeing in the dark"};
  app.require_subcommand(1);
  add_design(app);
  add_simulate(app);
  add_evaluate(app);
  add_realize(app);
  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const RankError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace nightspec
