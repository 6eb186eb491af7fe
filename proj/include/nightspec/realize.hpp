#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "nightspec/spectra.hpp"

namespace nightspec {

struct RealizationFit {
  std::vector<double> weights;   // one per base, all >= 0
  double residual_l2 = 0.0;      // ||sum_k w_k base_k - target||_2
  std::size_t active_count = 0;  // weights above the 1e-10 zero tolerance
};

// Active-set non-negative least squares onto the bank's bases. When
// max_active is set and the unrestricted solution uses more bases, the
// largest-weight ones are kept and the fit is redone on that subset.
RealizationFit fit_nnls(const SpectralCurve& target, const LedBank& bank,
                        std::optional<std::size_t> max_active = std::nullopt);

}  // namespace nightspec
