#include <doctest.h>

#include <cmath>
#include <random>

#include "denoise/error.hpp"
#include "denoise/metrics.hpp"
#include "denoise/noise.hpp"

using namespace denoise;

namespace {

Image textured(int w, int h, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  Image img(w, h);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) img(r, c) = 0.5 * u(gen) + 60.0 * std::sin(0.3 * r) + 60.0;
  return img;
}

}  // namespace

TEST_CASE("mse oracles") {
  const Image a(2, 1, std::vector<double>{0, 10});
  const Image b(2, 1, std::vector<double>{10, 0});
  CHECK(mse(a, b) == 100.0);
  CHECK(mse(a, a) == 0.0);
  CHECK(mse(Image(5, 5, 16.0), Image(5, 5, 0.0)) == 256.0);
  CHECK_THROWS_AS(mse(Image(2, 2), Image(3, 2)), SizeError);
}

TEST_CASE("psnr oracles") {
  CHECK(psnr(Image(5, 5, 16.0), Image(5, 5, 0.0)) == doctest::Approx(24.05).epsilon(0.005 / 24.05));
  CHECK(std::isinf(psnr(Image(3, 3, 1.0), Image(3, 3, 1.0))));
  const Image img = textured(32, 32, 1);
  double prev = INFINITY;
  for (double off : {1.0, 2.0, 4.0, 8.0}) {
    Image shifted = img;
    for (double& v : shifted.pixels()) v += off;
    const double p = psnr(img, shifted);
    CHECK(p < prev);
    prev = p;
  }
}

TEST_CASE("ssim oracles") {
  const double c1 = (0.01 * 255) * (0.01 * 255);
  const double expected = (2 * 100.0 * 150.0 + c1) / (100.0 * 100.0 + 150.0 * 150.0 + c1);
  CHECK(ssim(Image(20, 20, 100.0), Image(20, 20, 150.0)) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.9231).epsilon(1e-4));

  const Image img = textured(40, 33, 2);
  CHECK(ssim(img, img) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(ssim(Image(10, 30), Image(10, 30)), SizeError);
  CHECK_THROWS_AS(ssim(Image(20, 20), Image(21, 20)), SizeError);
}

TEST_CASE("ssim symmetry and bounds") {
  for (unsigned s = 0; s < 10; ++s) {
    const Image a = textured(48, 40, s);
    const Image b = awgn(a, NoiseSpec::awgn(25.0, s));
    const double ab = ssim(a, b);
    CHECK(std::abs(ab - ssim(b, a)) <= 1e-12);
    CHECK(ab <= 1.0);
    Image offset = a;
    for (double& v : offset.pixels()) v += 3.0;
    CHECK(ssim(a, offset) < 1.0);
  }
}

TEST_CASE("noisy psnr decreases with sigma") {
  const Image img = textured(64, 64, 7);
  double prev = INFINITY;
  for (double sigma : {5.0, 20.0, 35.0, 50.0, 65.0, 80.0, 95.0, 100.0}) {
    const double p = psnr(img, awgn(img, NoiseSpec::awgn(sigma, 3)));
    CHECK(p < prev);
    prev = p;
  }
}
