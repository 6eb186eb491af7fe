#include "nightspec/optimizer.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "nightspec/errors.hpp"
#include "nightspec/kernels.hpp"
#include "nightspec/restore.hpp"
#include "nightspec/rng.hpp"

namespace nightspec {

void validate_config(const DesignConfig& c) {
  const auto bad = [](const std::string& msg) {
    throw DomainError("config: " + msg);
  };
  if (!(c.psi_hat > 0.0) || !std::isfinite(c.psi_hat)) {
    bad("psi_hat must be positive and finite");
  }
  if (!(c.epsilon > 0.0)) bad("epsilon must be > 0");
  if (c.iters < 1) bad("iters must be >= 1");
  if (!(c.step_size > 0.0)) bad("step_size must be > 0");
  if (c.decay_every < 1) bad("decay_every must be >= 1");
  if (!(c.decay_factor > 0.0 && c.decay_factor <= 1.0)) {
    bad("decay_factor must be in (0, 1]");
  }
  if (c.batch < 1) bad("batch must be >= 1");
  if (!(c.fd_step > 0.0)) bad("fd_step must be > 0");
  if (!(c.kappa > 0.0)) bad("kappa must be > 0");
  if (!(c.noise_stddev >= 0.0)) bad("noise_stddev must be >= 0");
  if (!(c.ridge >= 0.0)) bad("ridge must be >= 0");
  if (c.checkpoint_every < 1) bad("checkpoint_every must be >= 1");
  if (c.threads < 1) bad("threads must be >= 1");
}

namespace {

struct SpectralState {
  DesignWeights weights;
  ProjectionResult proj;
  SpectralCurve phi;      // multiplex(bank, sigma)
  SpectralCurve phi_hat;  // multiplex(bank, sigma_hat)
  SpectralCurve phi_vis;
  SpectralCurve phi_nir;
};

SpectralState spectral_state(const std::vector<double>& logits,
                             const LedBank& bank,
                             const SpectralCurve& scotopic,
                             const DesignConfig& config) {
  SpectralState s;
  s.weights = DesignWeights::from_logits(logits);
  s.proj = project(bank, s.weights, scotopic, config.psi_hat, config.epsilon);
  s.phi = multiplex(bank, s.weights.sigma);
  s.phi_hat = multiplex(bank, s.proj.sigma_hat);
  s.phi_vis = split_vis(s.phi_hat);
  for (std::size_t n = 0; n < kNumBands; ++n) {
    s.phi_nir[n] = s.phi_hat[n] - s.phi_vis[n];
  }
  return s;
}

void check_batch(const std::vector<const HyperCube*>& cubes,
                 const std::vector<const RgbImage*>& gts) {
  if (cubes.empty()) {
    throw DomainError("objective needs a non-empty batch");
  }
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    if (cubes[i] == nullptr || gts[i] == nullptr) {
      throw DomainError("objective batch holds a null entry");
    }
  }
}

double objective_impl(const std::vector<double>& logits,
                      const std::vector<const HyperCube*>& cubes,
                      const std::vector<const RgbImage*>& gts,
                      const LedBank& bank, const CameraSensitivity& camera,
                      const SpectralCurve& scotopic,
                      const DesignConfig& config, std::uint64_t noise_tag) {
  check_batch(cubes, gts);
  const SpectralState s = spectral_state(logits, bank, scotopic, config);
  const BandScales scales =
      band_scale_factors(s.phi, s.phi_hat, config.epsilon);

  // Noisy captures render at the pre-projection brightness and the scale
  // factor inside the noise operator carries the dimming, so the noisy
  // mean sits at the projected level: E[vis] = xi_vis * render(phi's VIS).
  // With noise off the captures are the projected renders themselves.
  SpectralCurve in_vis = s.phi_vis;
  SpectralCurve in_nir = s.phi_nir;
  if (config.noise) {
    in_vis = split_vis(s.phi);
    for (std::size_t n = 0; n < kNumBands; ++n) {
      in_nir[n] = s.phi[n] - in_vis[n];
    }
  }

  std::vector<RgbImage> vis_in, nir_in;
  vis_in.reserve(cubes.size());
  nir_in.reserve(cubes.size());
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    RgbImage ivis = render(*cubes[i], in_vis, camera);
    RgbImage inir = render(*cubes[i], in_nir, camera);
    if (config.noise) {
      NoiseModel nm;
      nm.kappa = config.kappa;
      nm.pattern_stddev = config.noise_stddev;
      nm.seed = derive_stream(config.seed, kTagIterNoise, noise_tag, i, 0);
      vis_in.push_back(add_noise(ivis, scales.xi_vis, nm, config.threads));
      nm.seed = derive_stream(config.seed, kTagIterNoise, noise_tag, i, 1);
      nir_in.push_back(add_noise(inir, scales.xi_nir, nm, config.threads));
    } else {
      vis_in.push_back(std::move(ivis));
      nir_in.push_back(std::move(inir));
    }
  }

  FitAccumulator acc;
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    acc.add(vis_in[i], nir_in[i], *gts[i]);
  }
  const LinearReconstructor model = acc.solve(config.ridge);

  double loss = 0.0;
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    loss +=
        mse_loss(apply_reconstructor(model, vis_in[i], nir_in[i]), *gts[i]);
  }
  return loss / static_cast<double>(cubes.size());
}

// Noise-free value plus exact gradient. The loss reaches the logits along
// three paths: the projection scale xi, each sigma directly, and the refit
// of the reconstructor (whose matrix moves with the inputs). All three are
// differentiated; the last uses dM = (dB - M dA) (A + ridge I)^-1.
double gradient_impl(const std::vector<double>& logits,
                     const std::vector<const HyperCube*>& cubes,
                     const std::vector<const RgbImage*>& gts,
                     const LedBank& bank, const CameraSensitivity& camera,
                     const SpectralCurve& scotopic,
                     const DesignConfig& config, std::vector<double>& grad) {
  check_batch(cubes, gts);
  const std::size_t n_bases = bank.size();
  const SpectralState s = spectral_state(logits, bank, scotopic, config);
  const auto& kern = kernels::active();

  std::vector<RgbImage> vis_in, nir_in;
  vis_in.reserve(cubes.size());
  nir_in.reserve(cubes.size());
  FitAccumulator acc;
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    vis_in.push_back(render(*cubes[i], s.phi_vis, camera));
    nir_in.push_back(render(*cubes[i], s.phi_nir, camera));
    acc.add(vis_in[i], nir_in[i], *gts[i]);
  }
  const LinearReconstructor model = acc.solve(config.ridge);

  // Residuals and loss, same calls as the plain objective so the two paths
  // agree bit-for-bit.
  double loss = 0.0;
  std::vector<RgbImage> resid;
  resid.reserve(cubes.size());
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    RgbImage x = apply_reconstructor(model, vis_in[i], nir_in[i]);
    loss += mse_loss(x, *gts[i]);
    for (std::size_t e = 0; e < x.elements(); ++e) {
      x.data()[e] -= gts[i]->data()[e];
    }
    resid.push_back(std::move(x));
  }
  loss /= static_cast<double>(cubes.size());

  // Aggregated pixel moments. With plane_n the cube's band-n image and
  // u = [vis RGB, nir RGB, 1] the fit input:
  //   t_mom[n][j] = sum_p plane_n u_j        (feeds dA)
  //   s_mom[n][c] = sum_p plane_n y_c        (feeds dB)
  //   w_mom[c][j] = sum_p weighted r_c u_j   (pairs with dM)
  //   gv[n], gn[n] = sum_p weighted (M^T r) . d(render)/d(phi[n]) slices
  double t_mom[kNumBands][7] = {};
  double s_mom[kNumBands][3] = {};
  double w_mom[3][7] = {};
  double gv[kNumBands] = {};
  double gn[kNumBands] = {};
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    const std::size_t px = cubes[i]->pixels();
    const double wi = 1.0 / (static_cast<double>(cubes.size()) * 3.0 *
                             static_cast<double>(px));
    const double* u[7] = {vis_in[i].plane(0), vis_in[i].plane(1),
                          vis_in[i].plane(2), nir_in[i].plane(0),
                          nir_in[i].plane(1), nir_in[i].plane(2), nullptr};
    for (std::size_t n = 0; n < kNumBands; ++n) {
      const double* pn = cubes[i]->plane(n);
      for (std::size_t j = 0; j < 6; ++j) {
        t_mom[n][j] += kern.dot(pn, u[j], px);
      }
      t_mom[n][6] += kern.sum(pn, px);
      double rp[3];
      for (std::size_t c = 0; c < 3; ++c) {
        s_mom[n][c] += kern.dot(pn, gts[i]->plane(c), px);
        rp[c] = kern.dot(pn, resid[i].plane(c), px);
      }
      for (std::size_t c = 0; c < 3; ++c) {
        double qv = 0.0, qn = 0.0;
        for (std::size_t cc = 0; cc < 3; ++cc) {
          qv += model.m[cc * 7 + c] * rp[cc];
          qn += model.m[cc * 7 + c + 3] * rp[cc];
        }
        gv[n] += wi * camera.rows[c][n] * qv;
        gn[n] += wi * camera.rows[c][n] * qn;
      }
    }
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t j = 0; j < 6; ++j) {
        w_mom[c][j] += wi * kern.dot(resid[i].plane(c), u[j], px);
      }
      w_mom[c][6] += wi * kern.sum(resid[i].plane(c), px);
    }
  }

  Eigen::Matrix<double, 7, 7> a_reg;
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) {
      a_reg(i, j) = acc.uu()[static_cast<std::size_t>(i) * 7 + j];
    }
    a_reg(i, i) += config.ridge;
  }
  const Eigen::FullPivLU<Eigen::Matrix<double, 7, 7>> a_lu(a_reg);
  Eigen::Matrix<double, 3, 7> m_eig;
  for (int c = 0; c < 3; ++c) {
    for (int j = 0; j < 7; ++j) {
      m_eig(c, j) = model.m[static_cast<std::size_t>(c) * 7 + j];
    }
  }

  // Spectral tangents. sigma_hat_j = (vis_j ? xi : 1) sigma_j with
  // xi = psi_hat / (psi + eps) when unclamped, so d phi_hat / d logit_k =
  // dxi_k * (VIS-active part of phi) + (vis_k ? xi : 1) sigma_k' base_k.
  const double dxi_dpsi =
      s.proj.xi < 1.0
          ? -config.psi_hat / ((s.proj.psi_before + config.epsilon) *
                               (s.proj.psi_before + config.epsilon))
          : 0.0;
  SpectralCurve phi_act;
  std::vector<double> v_base(n_bases);
  for (std::size_t k = 0; k < n_bases; ++k) {
    v_base[k] = perceived_power(scotopic, bank.base(k));
    if (bank.vis_active(k)) {
      for (std::size_t n = 0; n < kNumBands; ++n) {
        phi_act[n] += s.weights.sigma[k] * bank.base(k)[n];
      }
    }
  }

  grad.assign(n_bases, 0.0);
  for (std::size_t k = 0; k < n_bases; ++k) {
    const double sig = s.weights.sigma[k];
    const double dsig = sig * (1.0 - sig);
    const double dxi_k = dxi_dpsi * v_base[k] * dsig;
    const double direct = (bank.vis_active(k) ? s.proj.xi : 1.0) * dsig;

    double f_vis[kNumBands];
    double f_nir[kNumBands];
    for (std::size_t n = 0; n < kNumBands; ++n) {
      const double f = dxi_k * phi_act[n] + direct * bank.base(k)[n];
      f_vis[n] = n < kVisBands ? f : 0.0;
      f_nir[n] = n < kVisBands ? 0.0 : f;
    }

    // a_coef[j][n] is the tangent of fit input u_j along this logit, as a
    // combination of cube band planes.
    double a_coef[6][kNumBands];
    for (std::size_t j = 0; j < 6; ++j) {
      const SpectralCurve& cam = camera.rows[j % 3];
      const double* f = j < 3 ? f_vis : f_nir;
      for (std::size_t n = 0; n < kNumBands; ++n) {
        a_coef[j][n] = f[n] * cam[n];
      }
    }

    Eigen::Matrix<double, 7, 7> da = Eigen::Matrix<double, 7, 7>::Zero();
    Eigen::Matrix<double, 3, 7> db = Eigen::Matrix<double, 3, 7>::Zero();
    for (std::size_t j = 0; j < 6; ++j) {
      for (std::size_t n = 0; n < kNumBands; ++n) {
        const double aj = a_coef[j][n];
        if (aj == 0.0) {
          continue;
        }
        for (int col = 0; col < 7; ++col) {
          da(static_cast<int>(j), col) += aj * t_mom[n][col];
        }
        for (int c = 0; c < 3; ++c) {
          db(c, static_cast<int>(j)) += aj * s_mom[n][c];
        }
      }
    }
    const Eigen::Matrix<double, 7, 7> da_sym = da + da.transpose();
    const Eigen::Matrix<double, 3, 7> rhs = db - m_eig * da_sym;
    const Eigen::Matrix<double, 7, 3> dmt = a_lu.solve(rhs.transpose());

    double g = 0.0;
    for (int c = 0; c < 3; ++c) {
      for (int j = 0; j < 7; ++j) {
        g += dmt(j, c) * w_mom[c][j];
      }
    }
    for (std::size_t n = 0; n < kNumBands; ++n) {
      g += f_vis[n] * gv[n] + f_nir[n] * gn[n];
    }
    grad[k] = 2.0 * g;
  }
  return loss;
}

std::vector<RgbImage> make_ground_truths(
    const std::vector<const HyperCube*>& cubes, const SpectralCurve& white,
    const CameraSensitivity& camera) {
  if (cubes.empty()) {
    throw DomainError("objective needs a non-empty batch");
  }
  std::vector<RgbImage> gts;
  gts.reserve(cubes.size());
  for (const HyperCube* cube : cubes) {
    if (cube == nullptr) {
      throw DomainError("objective batch holds a null entry");
    }
    gts.push_back(ground_truth(*cube, white, camera));
  }
  return gts;
}

std::vector<const RgbImage*> as_ptrs(const std::vector<RgbImage>& images) {
  std::vector<const RgbImage*> out;
  out.reserve(images.size());
  for (const auto& img : images) {
    out.push_back(&img);
  }
  return out;
}

}  // namespace

double objective(const std::vector<double>& logits,
                 const std::vector<const HyperCube*>& cubes,
                 const LedBank& bank, const CameraSensitivity& camera,
                 const SpectralCurve& scotopic, const SpectralCurve& white,
                 const DesignConfig& config, std::uint64_t noise_tag) {
  validate_config(config);
  const std::vector<RgbImage> gts = make_ground_truths(cubes, white, camera);
  return objective_impl(logits, cubes, as_ptrs(gts), bank, camera, scotopic,
                        config, noise_tag);
}

double objective_gradient(const std::vector<double>& logits,
                          const std::vector<const HyperCube*>& cubes,
                          const LedBank& bank, const CameraSensitivity& camera,
                          const SpectralCurve& scotopic,
                          const SpectralCurve& white,
                          const DesignConfig& config,
                          std::vector<double>& grad) {
  validate_config(config);
  const std::vector<RgbImage> gts = make_ground_truths(cubes, white, camera);
  return gradient_impl(logits, cubes, as_ptrs(gts), bank, camera, scotopic,
                       config, grad);
}

DesignResult design_spectrum(const std::vector<HyperCube>& train,
                             const LedBank& bank,
                             const CameraSensitivity& camera,
                             const SpectralCurve& scotopic,
                             const SpectralCurve& white,
                             const DesignConfig& config,
                             const CheckpointFn& on_checkpoint) {
  validate_config(config);
  if (train.empty()) {
    throw DomainError("training set is empty");
  }
  std::vector<RgbImage> gts;
  gts.reserve(train.size());
  for (const auto& cube : train) {
    gts.push_back(ground_truth(cube, white, camera));
  }

  const std::size_t n_train = train.size();
  const std::size_t n_bases = bank.size();
  std::vector<double> logits(n_bases, 0.0);
  std::vector<double> grad(n_bases, 0.0);

  // Shuffled-epoch sampler; partial tails wrap into the next epoch.
  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::uint64_t epoch = 0;
  std::size_t pos = n_train;
  const auto next_index = [&]() {
    if (pos >= n_train) {
      Stream st(derive_stream(config.seed, kTagBatch, epoch++));
      for (std::size_t i = n_train; i > 1; --i) {
        std::swap(order[i - 1], order[st.next_u64() % i]);
      }
      pos = 0;
    }
    return order[pos++];
  };
  const std::size_t batch_size =
      std::min<std::size_t>(static_cast<std::size_t>(config.batch), n_train);

  DesignResult result;
  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<double> best_logits = logits;

  std::vector<const HyperCube*> cubes(batch_size);
  std::vector<const RgbImage*> gt_ptrs(batch_size);
  for (int t = 0; t < config.iters; ++t) {
    for (std::size_t b = 0; b < batch_size; ++b) {
      const std::size_t idx = next_index();
      cubes[b] = &train[idx];
      gt_ptrs[b] = &gts[idx];
    }
    const auto tag = static_cast<std::uint64_t>(t);

    double reported;
    if (config.grad_mode == GradMode::kAnalyticNoiseFree) {
      const double noise_free = gradient_impl(logits, cubes, gt_ptrs, bank,
                                              camera, scotopic, config, grad);
      reported = config.noise
                     ? objective_impl(logits, cubes, gt_ptrs, bank, camera,
                                      scotopic, config, tag)
                     : noise_free;
    } else {
      reported = objective_impl(logits, cubes, gt_ptrs, bank, camera,
                                scotopic, config, tag);
      // Central differences sharing the evaluation's noise draws, so the
      // estimator sees the smooth part of the landscape.
      std::vector<double> probe = logits;
      for (std::size_t k = 0; k < n_bases; ++k) {
        probe[k] = logits[k] + config.fd_step;
        const double hi = objective_impl(probe, cubes, gt_ptrs, bank, camera,
                                         scotopic, config, tag);
        probe[k] = logits[k] - config.fd_step;
        const double lo = objective_impl(probe, cubes, gt_ptrs, bank, camera,
                                         scotopic, config, tag);
        probe[k] = logits[k];
        grad[k] = (hi - lo) / (2.0 * config.fd_step);
      }
    }

    bool finite = std::isfinite(reported);
    for (double g : grad) {
      finite = finite && std::isfinite(g);
    }
    if (!finite) {
      throw NumericalError("objective became non-finite at iteration " +
                           std::to_string(t));
    }

    if (reported < best_loss) {
      best_loss = reported;
      best_logits = logits;
    }

    if (t % config.checkpoint_every == 0 || t == config.iters - 1) {
      const SpectralState s = spectral_state(logits, bank, scotopic, config);
      TraceRecord rec;
      rec.iteration = t;
      rec.sigma = s.weights.sigma;
      rec.xi = s.proj.xi;
      rec.psi_after = s.proj.psi_after;
      rec.loss = reported;
      rec.best_loss = best_loss;
      if (on_checkpoint) {
        on_checkpoint(rec);
      }
      result.trace.push_back(std::move(rec));
    }

    const double lr =
        config.step_size *
        std::pow(config.decay_factor, t / config.decay_every);
    for (std::size_t k = 0; k < n_bases; ++k) {
      logits[k] = std::clamp(logits[k] - lr * grad[k], -36.0, 36.0);
    }
  }

  const SpectralState s = spectral_state(best_logits, bank, scotopic, config);
  result.logits = best_logits;
  result.sigma = s.weights.sigma;
  result.sigma_hat = s.proj.sigma_hat;
  result.curve = s.phi_hat;
  result.xi = s.proj.xi;
  result.psi_after = s.proj.psi_after;
  result.loss = best_loss;
  return result;
}

DesignResult design_spectrum(const DatasetManifest& manifest,
                             const LedBank& bank,
                             const CameraSensitivity& camera,
                             const SpectralCurve& scotopic,
                             const SpectralCurve& white,
                             const DesignConfig& config,
                             const CheckpointFn& on_checkpoint) {
  const auto train_entries = manifest.split(true);
  if (train_entries.empty()) {
    throw DomainError("manifest has no train entries");
  }
  std::vector<HyperCube> train;
  train.reserve(train_entries.size());
  for (const auto& entry : train_entries) {
    train.push_back(load_cube(entry.cube_path));
  }
  return design_spectrum(train, bank, camera, scotopic, white, config,
                         on_checkpoint);
}

}  // namespace nightspec
