#include "nightspec/visibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "nightspec/errors.hpp"

namespace nightspec {

double logistic(double x) {
  double s;
  if (x >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    s = e / (1.0 + e);
  }
  // Largest double below 1 is 1 - eps/2.
  constexpr double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
  constexpr double lo = std::numeric_limits<double>::min();
  return std::clamp(s, lo, hi);
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("logit needs p in (0,1), got " + std::to_string(p));
  }
  return std::log(p / (1.0 - p));
}

DesignWeights DesignWeights::from_logits(std::vector<double> logits) {
  DesignWeights w;
  w.sigma.reserve(logits.size());
  for (double l : logits) {
    if (!std::isfinite(l)) {
      throw DomainError("design logit must be finite");
    }
    w.sigma.push_back(logistic(l));
  }
  w.logits = std::move(logits);
  return w;
}

double scale_factor(double psi, double psi_hat, double epsilon) {
  if (!(psi >= 0.0)) {
    throw DomainError("scale_factor: perceived power must be >= 0");
  }
  if (!(psi_hat > 0.0) || !std::isfinite(psi_hat)) {
    throw DomainError("scale_factor: visibility threshold must be > 0");
  }
  if (!(epsilon > 0.0)) {
    throw DomainError("scale_factor: epsilon must be > 0");
  }
  return std::min(psi_hat / (psi + epsilon), 1.0);
}

ProjectionResult project(const LedBank& bank, const DesignWeights& weights,
                         const SpectralCurve& scotopic, double psi_hat,
                         double epsilon) {
  if (weights.sigma.size() != bank.size()) {
    throw ShapeError("project: " + std::to_string(weights.sigma.size()) +
                     " weights for a bank of " + std::to_string(bank.size()));
  }
  ProjectionResult r;
  r.psi_before = perceived_power(scotopic, multiplex(bank, weights.sigma));
  r.xi = scale_factor(r.psi_before, psi_hat, epsilon);
  r.sigma_hat.resize(weights.sigma.size());
  for (std::size_t k = 0; k < weights.sigma.size(); ++k) {
    r.sigma_hat[k] =
        bank.vis_active(k) ? r.xi * weights.sigma[k] : weights.sigma[k];
  }
  r.psi_after = perceived_power(scotopic, multiplex(bank, r.sigma_hat));
  return r;
}

}  // namespace nightspec
