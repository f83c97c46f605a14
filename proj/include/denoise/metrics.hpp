#pragma once

#include "denoise/image.hpp"

namespace denoise {

struct MetricPair {
  double psnr;  // dB, +inf for identical inputs
  double ssim;
};

double mse(const Image& a, const Image& b);

// 10 log10(peak^2 / mse), +infinity when mse == 0.
double psnr(const Image& a, const Image& b, double peak = 255.0);

// Mean SSIM over the valid region of an 11x11 Gaussian window (std 1.5),
// K1 = 0.01, K2 = 0.03, L = 255.
double ssim(const Image& a, const Image& b);

MetricPair evaluate(const Image& reference, const Image& test);

}  // namespace denoise
