#include "denoise/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "denoise/error.hpp"

namespace denoise {

namespace {

constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;
constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);

void require_same_shape(const Image& a, const Image& b) {
  if (!a.same_shape(b)) {
    throw SizeError("dimension mismatch: " + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                    std::to_string(b.height()));
  }
}

std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> taps{};
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double x = i - kWindow / 2;
    taps[i] = std::exp(-(x * x) / (2.0 * kWindowSigma * kWindowSigma));
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

// Separable valid-region filtering of a per-pixel quantity f(a, b).
template <typename F>
std::vector<double> filter_valid(const Image& a, const Image& b, F f) {
  static const auto taps = gaussian_taps();
  const int w = a.width();
  const int h = a.height();
  const int ow = w - kWindow + 1;
  const int oh = h - kWindow + 1;

  std::vector<double> horiz(static_cast<std::size_t>(h) * ow);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += taps[k] * f(a(r, c + k), b(r, c + k));
      horiz[static_cast<std::size_t>(r) * ow + c] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += taps[k] * horiz[static_cast<std::size_t>(r + k) * ow + c];
      out[static_cast<std::size_t>(r) * ow + c] = acc;
    }
  }
  return out;
}

}  // namespace

double mse(const Image& a, const Image& b) {
  require_same_shape(a, b);
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  double acc = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double d = pa[i] - pb[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pa.size());
}

double psnr(const Image& a, const Image& b, double peak) {
  const double err = mse(a, b);
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / err);
}

double ssim(const Image& a, const Image& b) {
  require_same_shape(a, b);
  if (a.width() < kWindow || a.height() < kWindow) {
    throw SizeError("SSIM needs images of at least 11x11, got " + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()));
  }
  const auto mu_a = filter_valid(a, b, [](double x, double) { return x; });
  const auto mu_b = filter_valid(a, b, [](double, double y) { return y; });
  const auto sq_a = filter_valid(a, b, [](double x, double) { return x * x; });
  const auto sq_b = filter_valid(a, b, [](double, double y) { return y * y; });
  const auto cross = filter_valid(a, b, [](double x, double y) { return x * y; });

  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i];
    const double mb = mu_b[i];
    const double var_a = sq_a[i] - ma * ma;
    const double var_b = sq_b[i] - mb * mb;
    const double cov = cross[i] - ma * mb;
    const double num = (2.0 * ma * mb + kC1) * (2.0 * cov + kC2);
    const double den = (ma * ma + mb * mb + kC1) * (var_a + var_b + kC2);
    total += num / den;
  }
  return total / static_cast<double>(mu_a.size());
}

MetricPair evaluate(const Image& reference, const Image& test) {
  return {psnr(reference, test), ssim(reference, test)};
}

}  // namespace denoise
