#pragma once

#include <vector>

#include "nightspec/spectra.hpp"

namespace nightspec {

// Numerically stable sigmoid, clamped into the open interval so weights
// never reach 0 or 1 exactly no matter how large the logit.
double logistic(double x);

// Inverse of logistic on (0,1).
double logit(double p);

// Mixing weights sigma in (0,1)^K driven by unconstrained logits.
struct DesignWeights {
  std::vector<double> logits;
  std::vector<double> sigma;

  static DesignWeights from_logits(std::vector<double> logits);
};

struct ProjectionResult {
  std::vector<double> sigma_hat;
  double xi;          // scale applied to VIS-active coefficients, in (0,1]
  double psi_before;  // perceived power of the unprojected spectrum
  double psi_after;   // perceived power after scaling
};

// min(psi_hat / (psi + epsilon), 1). Throws DomainError unless psi >= 0,
// psi_hat > 0, epsilon > 0.
double scale_factor(double psi, double psi_hat, double epsilon);

// Scales the VIS-active coefficients by the factor above so the multiplexed
// spectrum's perceived power comes out at most psi_hat (up to the epsilon
// perturbation); coefficients of bases invisible under scotopic vision pass
// through bit-unchanged.
ProjectionResult project(const LedBank& bank, const DesignWeights& weights,
                         const SpectralCurve& scotopic, double psi_hat,
                         double epsilon);

}  // namespace nightspec
