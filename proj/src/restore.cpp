#include "nightspec/restore.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "nightspec/errors.hpp"
#include "nightspec/kernels.hpp"

namespace nightspec {

namespace {

void check_same_size(const RgbImage& a, const RgbImage& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ShapeError(std::string(what) + ": image sizes differ");
  }
}

}  // namespace

void FitAccumulator::add(const RgbImage& vis, const RgbImage& nir,
                         const RgbImage& target) {
  check_same_size(vis, nir, "fit");
  check_same_size(vis, target, "fit");
  const std::size_t px = vis.pixels();
  for (std::size_t p = 0; p < px; ++p) {
    const double u[7] = {vis.plane(0)[p], vis.plane(1)[p], vis.plane(2)[p],
                         nir.plane(0)[p], nir.plane(1)[p], nir.plane(2)[p],
                         1.0};
    for (std::size_t i = 0; i < 7; ++i) {
      for (std::size_t j = 0; j < 7; ++j) {
        uu_[i * 7 + j] += u[i] * u[j];
      }
    }
    for (std::size_t c = 0; c < 3; ++c) {
      const double y = target.plane(c)[p];
      for (std::size_t j = 0; j < 7; ++j) {
        yu_[c * 7 + j] += y * u[j];
      }
    }
  }
  count_ += px;
}

LinearReconstructor FitAccumulator::solve(double ridge) const {
  if (!(ridge >= 0.0)) {
    throw DomainError("ridge must be >= 0");
  }
  if (count_ == 0) {
    throw DomainError("no pixels accumulated");
  }
  Eigen::Matrix<double, 7, 7> a;
  Eigen::Matrix<double, 3, 7> b;
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) {
      a(i, j) = uu_[static_cast<std::size_t>(i) * 7 + j];
    }
    a(i, i) += ridge;
  }
  for (int c = 0; c < 3; ++c) {
    for (int j = 0; j < 7; ++j) {
      b(c, j) = yu_[static_cast<std::size_t>(c) * 7 + j];
    }
  }

  Eigen::Matrix<double, 7, 3> mt;
  if (ridge > 0.0) {
    // A + ridge I is positive definite.
    mt = a.ldlt().solve(b.transpose());
  } else {
    Eigen::FullPivLU<Eigen::Matrix<double, 7, 7>> lu(a);
    if (!lu.isInvertible()) {
      throw RankError("normal matrix is singular; a positive ridge is needed");
    }
    mt = lu.solve(b.transpose());
  }

  LinearReconstructor model;
  model.ridge = ridge;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t j = 0; j < 7; ++j) {
      model.m[c * 7 + j] = mt(static_cast<int>(j), static_cast<int>(c));
    }
  }
  return model;
}

LinearReconstructor fit_reconstructor(const RgbImage& vis, const RgbImage& nir,
                                      const RgbImage& target, double ridge) {
  FitAccumulator acc;
  acc.add(vis, nir, target);
  return acc.solve(ridge);
}

RgbImage apply_reconstructor(const LinearReconstructor& model,
                             const RgbImage& vis, const RgbImage& nir) {
  check_same_size(vis, nir, "apply");
  RgbImage out(vis.width(), vis.height());
  const std::size_t px = vis.pixels();
  for (std::size_t p = 0; p < px; ++p) {
    const double u[7] = {vis.plane(0)[p], vis.plane(1)[p], vis.plane(2)[p],
                         nir.plane(0)[p], nir.plane(1)[p], nir.plane(2)[p],
                         1.0};
    for (std::size_t c = 0; c < 3; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < 7; ++j) {
        acc += model.m[c * 7 + j] * u[j];
      }
      out.plane(c)[p] = acc;
    }
  }
  return out;
}

double mse_loss(const RgbImage& x, const RgbImage& y) {
  check_same_size(x, y, "mse");
  const std::size_t n = x.elements();
  return kernels::active().sum_sq_diff(x.data(), y.data(), n) /
         static_cast<double>(n);
}

double psnr(const RgbImage& x, const RgbImage& y, double peak) {
  if (!(peak > 0.0)) {
    throw DomainError("psnr peak must be > 0");
  }
  const double mse = mse_loss(x, y);
  if (mse == 0.0) {
    return 99.0;
  }
  return 10.0 * std::log10(peak * peak / mse);
}

namespace {

constexpr std::size_t kWindow = 11;
constexpr double kSsimC1 = 0.01 * 0.01;  // (K1 L)^2, L = 1
constexpr double kSsimC2 = 0.03 * 0.03;

const std::array<double, kWindow>& ssim_weights() {
  static const std::array<double, kWindow> w = [] {
    std::array<double, kWindow> out{};
    const double sigma = 1.5;
    double total = 0.0;
    for (std::size_t i = 0; i < kWindow; ++i) {
      const double d = static_cast<double>(i) - 5.0;
      out[i] = std::exp(-d * d / (2.0 * sigma * sigma));
      total += out[i];
    }
    for (auto& v : out) {
      v /= total;
    }
    return out;
  }();
  return w;
}

// Separable valid-mode filter: rows first, then columns.
std::vector<double> filter_valid(const std::vector<double>& img,
                                 std::size_t w, std::size_t h) {
  const auto& win = ssim_weights();
  const std::size_t ow = w - kWindow + 1;
  const std::size_t oh = h - kWindow + 1;
  std::vector<double> rows(ow * h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < kWindow; ++k) {
        acc += win[k] * img[y * w + x + k];
      }
      rows[y * ow + x] = acc;
    }
  }
  std::vector<double> out(ow * oh);
  for (std::size_t y = 0; y < oh; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < kWindow; ++k) {
        acc += win[k] * rows[(y + k) * ow + x];
      }
      out[y * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double ssim(const RgbImage& x, const RgbImage& y) {
  check_same_size(x, y, "ssim");
  const std::size_t w = x.width();
  const std::size_t h = x.height();
  if (w < kWindow || h < kWindow) {
    throw DomainError("ssim needs images at least 11 pixels on each side");
  }
  const std::size_t px = x.pixels();
  const std::size_t valid = (w - kWindow + 1) * (h - kWindow + 1);

  double total = 0.0;
  std::vector<double> a(px), b(px), aa(px), bb(px), ab(px);
  for (std::size_t c = 0; c < 3; ++c) {
    const double* xp = x.plane(c);
    const double* yp = y.plane(c);
    for (std::size_t p = 0; p < px; ++p) {
      a[p] = xp[p];
      b[p] = yp[p];
      aa[p] = xp[p] * xp[p];
      bb[p] = yp[p] * yp[p];
      ab[p] = xp[p] * yp[p];
    }
    const auto mu_a = filter_valid(a, w, h);
    const auto mu_b = filter_valid(b, w, h);
    const auto m_aa = filter_valid(aa, w, h);
    const auto m_bb = filter_valid(bb, w, h);
    const auto m_ab = filter_valid(ab, w, h);
    for (std::size_t p = 0; p < valid; ++p) {
      const double va = m_aa[p] - mu_a[p] * mu_a[p];
      const double vb = m_bb[p] - mu_b[p] * mu_b[p];
      const double cov = m_ab[p] - mu_a[p] * mu_b[p];
      const double num = (2.0 * mu_a[p] * mu_b[p] + kSsimC1) *
                         (2.0 * cov + kSsimC2);
      const double den = (mu_a[p] * mu_a[p] + mu_b[p] * mu_b[p] + kSsimC1) *
                         (va + vb + kSsimC2);
      total += num / den;
    }
  }
  return total / (3.0 * static_cast<double>(valid));
}

}  // namespace nightspec
