#include "denoise/noise.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <numbers>
#include <string>

#include "denoise/error.hpp"

namespace denoise {

namespace {

constexpr std::uint64_t kNormalStream = 0x6e6f726d616c0001ULL;
constexpr std::uint64_t kSaltPepperStream = 0x73616c7470657001ULL;
constexpr std::uint64_t kSpeckleStream = 0x737065636b6c0001ULL;

void require_family(const NoiseSpec& spec, NoiseFamily family) {
  if (spec.family != family) {
    throw ConfigError("noise spec family is " + std::string(to_string(spec.family)) +
                      ", expected " + std::string(to_string(family)));
  }
  spec.validate();
}

}  // namespace

std::string_view to_string(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::awgn: return "awgn";
    case NoiseFamily::salt_pepper: return "salt_pepper";
    case NoiseFamily::speckle: return "speckle";
  }
  return "awgn";
}

void NoiseSpec::validate() const {
  if (!std::isfinite(level)) throw ConfigError("noise level must be finite");
  switch (family) {
    case NoiseFamily::awgn:
      if (!(level > 0.0)) throw ConfigError("awgn sigma must be > 0");
      break;
    case NoiseFamily::salt_pepper:
      if (!(level > 0.0 && level <= 0.5)) {
        throw ConfigError("salt_pepper density must be in (0, 0.5]");
      }
      break;
    case NoiseFamily::speckle:
      if (!(level > 0.0)) throw ConfigError("speckle variance must be > 0");
      break;
  }
}

void to_json(nlohmann::json& j, const NoiseSpec& spec) {
  j = nlohmann::json{{"family", std::string(to_string(spec.family))}, {"seed", spec.seed}};
  switch (spec.family) {
    case NoiseFamily::awgn: j["sigma"] = spec.level; break;
    case NoiseFamily::salt_pepper: j["density"] = spec.level; break;
    case NoiseFamily::speckle: j["variance"] = spec.level; break;
  }
}

void from_json(const nlohmann::json& j, NoiseSpec& spec) {
  const std::string family = j.value("family", std::string("awgn"));
  if (family == "awgn") {
    spec.family = NoiseFamily::awgn;
    spec.level = j.at("sigma").get<double>();
  } else if (family == "salt_pepper") {
    spec.family = NoiseFamily::salt_pepper;
    spec.level = j.at("density").get<double>();
  } else if (family == "speckle") {
    spec.family = NoiseFamily::speckle;
    spec.level = j.at("variance").get<double>();
  } else {
    throw ConfigError("unknown noise family '" + family + "'");
  }
  spec.seed = j.value("seed", std::uint64_t{0});
  spec.validate();
}

namespace rng {

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return mix64(mix64(mix64(seed) ^ stream) ^ index);
}

double uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t bits = hash(seed, stream, index) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t pair_index) {
  const double u1 = uniform(seed, kNormalStream, 2 * pair_index);
  const double u2 = uniform(seed, kNormalStream, 2 * pair_index + 1);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace rng

Image awgn(const Image& img, const NoiseSpec& spec) {
  require_family(spec, NoiseFamily::awgn);
  Image out = img;
  auto px = out.pixels();
  for (std::size_t i = 0; i < px.size(); i += 2) {
    const auto [z0, z1] = rng::normal_pair(spec.seed, i / 2);
    px[i] += spec.level * z0;
    if (i + 1 < px.size()) px[i + 1] += spec.level * z1;
  }
  return out;
}

Image salt_pepper(const Image& img, const NoiseSpec& spec) {
  require_family(spec, NoiseFamily::salt_pepper);
  Image out = img;
  auto px = out.pixels();
  const double half = spec.level / 2.0;
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double u = rng::uniform(spec.seed, kSaltPepperStream, i);
    if (u < half) {
      px[i] = 0.0;
    } else if (u < spec.level) {
      px[i] = 255.0;
    }
  }
  return out;
}

Image speckle(const Image& img, const NoiseSpec& spec) {
  require_family(spec, NoiseFamily::speckle);
  Image out = img;
  auto px = out.pixels();
  const double half_width = std::sqrt(3.0 * spec.level);
  for (std::size_t i = 0; i < px.size(); ++i) {
    const double u = rng::uniform(spec.seed, kSpeckleStream, i);
    px[i] *= 1.0 + half_width * (2.0 * u - 1.0);
  }
  return out;
}

Image corrupt(const Image& img, const NoiseSpec& spec) {
  switch (spec.family) {
    case NoiseFamily::awgn: return awgn(img, spec);
    case NoiseFamily::salt_pepper: return salt_pepper(img, spec);
    case NoiseFamily::speckle: return speckle(img, spec);
  }
  throw ConfigError("unknown noise family");
}

}  // namespace denoise
