#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "nightspec/dataset.hpp"
#include "nightspec/imaging.hpp"
#include "nightspec/visibility.hpp"

namespace nightspec {

enum class GradMode { kAnalyticNoiseFree, kFiniteDifference };

struct DesignConfig {
  double psi_hat = 10.0;
  double epsilon = 1e-9;
  int iters = 50000;
  double step_size = 1e-3;
  int decay_every = 20000;  // step size multiplied by decay_factor here
  double decay_factor = 0.1;
  int batch = 16;
  GradMode grad_mode = GradMode::kAnalyticNoiseFree;
  double fd_step = 1e-3;  // logit-space step for finite differences
  std::uint64_t seed = 0;
  bool noise = true;  // Poisson + pattern noise in the reported objective
  double kappa = 1.0 / 255.0;
  double noise_stddev = 0.0;
  double ridge = 1e-6;
  int checkpoint_every = 100;
  int threads = 1;
  // Recorded for reference only; the update rule is plain gradient descent,
  // which this landscape is small enough for.
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;
};

// Throws DomainError on out-of-range fields.
void validate_config(const DesignConfig& config);

struct TraceRecord {
  int iteration = 0;
  std::vector<double> sigma;
  double xi = 1.0;
  double psi_after = 0.0;
  double loss = 0.0;
  double best_loss = 0.0;
};

struct DesignResult {
  std::vector<double> logits;     // best iterate
  std::vector<double> sigma;      // logistic(logits)
  std::vector<double> sigma_hat;  // after the visibility projection
  SpectralCurve curve;            // multiplex(bank, sigma_hat)
  double xi = 1.0;
  double psi_after = 0.0;
  double loss = 0.0;
  std::vector<TraceRecord> trace;
};

// One full pipeline evaluation: project the weights, render the VIS and NIR
// images of every cube, corrupt them with seeded noise when enabled, fit one
// shared reconstructor over the whole batch, and return the mean per-cube
// MSE against the white-light ground truth. Deterministic given (logits,
// cubes, config.seed, noise_tag); noise_tag keeps distinct evaluations
// (e.g. per iteration) on distinct noise draws.
double objective(const std::vector<double>& logits,
                 const std::vector<const HyperCube*>& cubes,
                 const LedBank& bank, const CameraSensitivity& camera,
                 const SpectralCurve& scotopic, const SpectralCurve& white,
                 const DesignConfig& config, std::uint64_t noise_tag = 0);

// Noise-free objective value together with its exact gradient with respect
// to the logits, differentiating through the projection, the renders, and
// the closed-form reconstructor fit. Ignores config.noise.
double objective_gradient(const std::vector<double>& logits,
                          const std::vector<const HyperCube*>& cubes,
                          const LedBank& bank, const CameraSensitivity& camera,
                          const SpectralCurve& scotopic,
                          const SpectralCurve& white,
                          const DesignConfig& config,
                          std::vector<double>& grad);

using CheckpointFn = std::function<void(const TraceRecord&)>;

// Gradient descent on the logits with the configured schedule, sampling
// batches as seeded shuffled epochs. Keeps the best-loss iterate. Throws
// NumericalError if the objective or gradient stops being finite; records
// already handed to on_checkpoint survive the abort.
DesignResult design_spectrum(const std::vector<HyperCube>& train,
                             const LedBank& bank,
                             const CameraSensitivity& camera,
                             const SpectralCurve& scotopic,
                             const SpectralCurve& white,
                             const DesignConfig& config,
                             const CheckpointFn& on_checkpoint = nullptr);

// Same, loading the manifest's train split from disk first.
DesignResult design_spectrum(const DatasetManifest& manifest,
                             const LedBank& bank,
                             const CameraSensitivity& camera,
                             const SpectralCurve& scotopic,
                             const SpectralCurve& white,
                             const DesignConfig& config,
                             const CheckpointFn& on_checkpoint = nullptr);

}  // namespace nightspec
