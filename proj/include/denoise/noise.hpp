#pragma once

#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <string_view>
#include <utility>

#include "denoise/image.hpp"

namespace denoise {

enum class NoiseFamily { awgn, salt_pepper, speckle };

std::string_view to_string(NoiseFamily family);

// level is sigma (intensity units) for awgn, density in (0, 0.5] for
// salt_pepper, variance for speckle.
struct NoiseSpec {
  NoiseFamily family = NoiseFamily::awgn;
  double level = 0.0;
  std::uint64_t seed = 0;

  static NoiseSpec awgn(double sigma, std::uint64_t seed) {
    return {NoiseFamily::awgn, sigma, seed};
  }
  static NoiseSpec salt_pepper(double density, std::uint64_t seed) {
    return {NoiseFamily::salt_pepper, density, seed};
  }
  static NoiseSpec speckle(double variance, std::uint64_t seed) {
    return {NoiseFamily::speckle, variance, seed};
  }

  // Throws ConfigError when the level is outside the family's valid range.
  void validate() const;
};

// {"family": "awgn", "sigma": 20, "seed": 42}; salt_pepper uses "density",
// speckle uses "variance".
void to_json(nlohmann::json& j, const NoiseSpec& spec);
void from_json(const nlohmann::json& j, NoiseSpec& spec);

// Counter-based stream: every draw is a pure function of (seed, stream, index),
// so pixels can be generated in any order or in parallel.
namespace rng {

std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);
// Uniform on the open interval (0, 1), 53-bit resolution.
double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);
// Box-Muller pair for counter `pair_index`.
std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t pair_index);

}  // namespace rng

Image awgn(const Image& img, const NoiseSpec& spec);
Image salt_pepper(const Image& img, const NoiseSpec& spec);
Image speckle(const Image& img, const NoiseSpec& spec);

// Dispatches on spec.family.
Image corrupt(const Image& img, const NoiseSpec& spec);

}  // namespace denoise
