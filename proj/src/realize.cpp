#include "nightspec/realize.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nightspec/errors.hpp"

namespace nightspec {

namespace {

constexpr double kZeroTol = 1e-10;

// Lawson-Hanson: grow a passive set by the most violated dual coordinate,
// solve the unconstrained subproblem on it with QR, and step back along the
// segment toward the old iterate whenever the subproblem leaves the feasible
// orthant. Residual decreases monotonically and the loop is finite.
Eigen::VectorXd lawson_hanson(const Eigen::MatrixXd& a,
                              const Eigen::VectorXd& b) {
  const Eigen::Index k = a.cols();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(k);
  std::vector<bool> passive(static_cast<std::size_t>(k), false);

  Eigen::VectorXd dual = a.transpose() * b;
  const double dual_tol = 1e-11 * std::max(1.0, dual.cwiseAbs().maxCoeff());

  const int max_outer = 10 * static_cast<int>(k) + 10;
  for (int outer = 0; outer < max_outer; ++outer) {
    dual = a.transpose() * (b - a * w);
    Eigen::Index best = -1;
    double best_dual = dual_tol;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && dual(j) > best_dual) {
        best_dual = dual(j);
        best = j;
      }
    }
    if (best < 0) {
      return w;  // KKT satisfied
    }
    passive[static_cast<std::size_t>(best)] = true;

    for (int inner = 0; inner < max_outer; ++inner) {
      std::vector<Eigen::Index> idx;
      for (Eigen::Index j = 0; j < k; ++j) {
        if (passive[static_cast<std::size_t>(j)]) {
          idx.push_back(j);
        }
      }
      Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(idx.size()));
      for (std::size_t c = 0; c < idx.size(); ++c) {
        sub.col(static_cast<Eigen::Index>(c)) = a.col(idx[c]);
      }
      const Eigen::VectorXd z = sub.colPivHouseholderQr().solve(b);

      bool all_positive = true;
      for (std::size_t c = 0; c < idx.size(); ++c) {
        if (z(static_cast<Eigen::Index>(c)) <= kZeroTol) {
          all_positive = false;
          break;
        }
      }
      if (all_positive) {
        w.setZero();
        for (std::size_t c = 0; c < idx.size(); ++c) {
          w(idx[c]) = z(static_cast<Eigen::Index>(c));
        }
        break;
      }

      // Step from w toward z only as far as feasibility allows, then drop
      // every coordinate that hit zero.
      double alpha = 1.0;
      for (std::size_t c = 0; c < idx.size(); ++c) {
        const double zc = z(static_cast<Eigen::Index>(c));
        if (zc <= kZeroTol) {
          const double wc = w(idx[c]);
          if (wc - zc > 0.0) {
            alpha = std::min(alpha, wc / (wc - zc));
          }
        }
      }
      for (std::size_t c = 0; c < idx.size(); ++c) {
        const Eigen::Index j = idx[c];
        w(j) += alpha * (z(static_cast<Eigen::Index>(c)) - w(j));
        if (w(j) <= kZeroTol) {
          w(j) = 0.0;
          passive[static_cast<std::size_t>(j)] = false;
        }
      }
    }
  }
  throw NumericalError("non-negative least squares failed to converge");
}

}  // namespace

RealizationFit fit_nnls(const SpectralCurve& target, const LedBank& bank,
                        std::optional<std::size_t> max_active) {
  validate_curve(target, "realization target");
  if (max_active.has_value() && *max_active == 0) {
    throw DomainError("max_active must be at least 1");
  }

  Eigen::MatrixXd a(static_cast<Eigen::Index>(kNumBands),
                    static_cast<Eigen::Index>(bank.size()));
  Eigen::VectorXd b(static_cast<Eigen::Index>(kNumBands));
  for (std::size_t n = 0; n < kNumBands; ++n) {
    b(static_cast<Eigen::Index>(n)) = target[n];
    for (std::size_t j = 0; j < bank.size(); ++j) {
      a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j)) =
          bank.base(j)[n];
    }
  }

  Eigen::VectorXd w = lawson_hanson(a, b);

  if (max_active.has_value()) {
    std::vector<std::size_t> order(bank.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return w(static_cast<Eigen::Index>(x)) > w(static_cast<Eigen::Index>(y));
    });
    std::size_t used = 0;
    for (std::size_t j = 0; j < bank.size(); ++j) {
      if (w(static_cast<Eigen::Index>(j)) > kZeroTol) {
        ++used;
      }
    }
    if (used > *max_active) {
      std::vector<std::size_t> keep(order.begin(),
                                    order.begin() +
                                        static_cast<long>(*max_active));
      Eigen::MatrixXd sub(a.rows(),
                          static_cast<Eigen::Index>(keep.size()));
      for (std::size_t c = 0; c < keep.size(); ++c) {
        sub.col(static_cast<Eigen::Index>(c)) =
            a.col(static_cast<Eigen::Index>(keep[c]));
      }
      const Eigen::VectorXd wk = lawson_hanson(sub, b);
      w.setZero();
      for (std::size_t c = 0; c < keep.size(); ++c) {
        w(static_cast<Eigen::Index>(keep[c])) =
            wk(static_cast<Eigen::Index>(c));
      }
    }
  }

  RealizationFit fit;
  fit.weights.resize(bank.size());
  for (std::size_t j = 0; j < bank.size(); ++j) {
    fit.weights[j] = w(static_cast<Eigen::Index>(j));
    if (fit.weights[j] > kZeroTol) {
      ++fit.active_count;
    }
  }
  fit.residual_l2 = (a * w - b).norm();
  return fit;
}

}  // namespace nightspec
