#include "denoise/bm3d.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numbers>
#include <string>

#include "denoise/error.hpp"

namespace denoise {

namespace {

// Orthonormal DCT-II basis, row k = frequency k.
std::vector<double> dct_matrix(int n) {
  std::vector<double> m(static_cast<std::size_t>(n) * n);
  for (int k = 0; k < n; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
    for (int i = 0; i < n; ++i) {
      m[static_cast<std::size_t>(k) * n + i] = scale * std::cos(std::numbers::pi * (2 * i + 1) * k / (2.0 * n));
    }
  }
  return m;
}

const std::vector<double>& cached_dct(int n) {
  // Block sizes are tiny and fixed per run; a per-thread cache keeps lookups lock-free.
  thread_local int cached_n = -1;
  thread_local std::vector<double> cached;
  if (cached_n != n) {
    cached = dct_matrix(n);
    cached_n = n;
  }
  return cached;
}

// out = M * block * M^T (forward) or M^T * block * M (inverse), in place.
void separable_2d(std::span<double> block, int n, bool inverse) {
  const auto& m = cached_dct(n);
  std::vector<double> tmp(static_cast<std::size_t>(n) * n, 0.0);
  auto coeff = [&](int a, int b) {
    return inverse ? m[static_cast<std::size_t>(b) * n + a] : m[static_cast<std::size_t>(a) * n + b];
  };
  // rows: tmp = block * M^T  (transform each row)
  for (int r = 0; r < n; ++r) {
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += coeff(k, i) * block[static_cast<std::size_t>(r) * n + i];
      tmp[static_cast<std::size_t>(r) * n + k] = acc;
    }
  }
  // columns: block = M * tmp
  for (int c = 0; c < n; ++c) {
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += coeff(k, i) * tmp[static_cast<std::size_t>(i) * n + c];
      block[static_cast<std::size_t>(k) * n + c] = acc;
    }
  }
}

// Full multi-level orthonormal Haar along the stack for every coefficient position.
void haar_forward(std::span<double> stack, std::size_t plane, int count) {
  std::vector<double> line(static_cast<std::size_t>(count));
  std::vector<double> tmp(static_cast<std::size_t>(count));
  const double s = std::numbers::sqrt2 / 2.0;
  for (std::size_t pos = 0; pos < plane; ++pos) {
    for (int t = 0; t < count; ++t) line[t] = stack[t * plane + pos];
    for (int len = count; len > 1; len /= 2) {
      const int half = len / 2;
      for (int i = 0; i < half; ++i) {
        tmp[i] = s * (line[2 * i] + line[2 * i + 1]);
        tmp[half + i] = s * (line[2 * i] - line[2 * i + 1]);
      }
      std::copy(tmp.begin(), tmp.begin() + len, line.begin());
    }
    for (int t = 0; t < count; ++t) stack[t * plane + pos] = line[t];
  }
}

void haar_inverse(std::span<double> stack, std::size_t plane, int count) {
  std::vector<double> line(static_cast<std::size_t>(count));
  std::vector<double> tmp(static_cast<std::size_t>(count));
  const double s = std::numbers::sqrt2 / 2.0;
  for (std::size_t pos = 0; pos < plane; ++pos) {
    for (int t = 0; t < count; ++t) line[t] = stack[t * plane + pos];
    for (int len = 2; len <= count; len *= 2) {
      const int half = len / 2;
      for (int i = 0; i < half; ++i) {
        tmp[2 * i] = s * (line[i] + line[half + i]);
        tmp[2 * i + 1] = s * (line[i] - line[half + i]);
      }
      std::copy(tmp.begin(), tmp.begin() + len, line.begin());
    }
    for (int t = 0; t < count; ++t) stack[t * plane + pos] = line[t];
  }
}

void require_power_of_two(int count) {
  if (count < 1 || !std::has_single_bit(static_cast<unsigned>(count))) {
    throw SizeError("group size " + std::to_string(count) + " is not a power of two");
  }
}

void check_image(const Image& img, const Bm3dParams& params) {
  if (img.width() < params.block_size || img.height() < params.block_size) {
    throw SizeError("image " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                    " is smaller than the " + std::to_string(params.block_size) + "-pixel block");
  }
}

std::vector<PatchOrigin> reference_grid(const Image& img, const Bm3dParams& params) {
  const auto rows = axis_origins(img.height(), params.block_size, params.step);
  const auto cols = axis_origins(img.width(), params.block_size, params.step);
  std::vector<PatchOrigin> refs;
  refs.reserve(rows.size() * cols.size());
  for (int r : rows)
    for (int c : cols) refs.push_back({r, c});
  return refs;
}

void aggregate_group(PatchAccumulator& acc, const BlockGroup& group, std::span<const double> stack,
                     double weight) {
  const std::size_t plane = static_cast<std::size_t>(group.block_size) * group.block_size;
  for (std::size_t t = 0; t < group.size(); ++t) {
    acc.add(group.coords[t], group.block_size, stack.subspan(t * plane, plane), weight);
  }
}

}  // namespace

Bm3dParams Bm3dParams::for_sigma(double sigma) {
  Bm3dParams p;
  p.sigma = sigma;
  return p;
}

double Bm3dParams::stage1_threshold() const {
  return std::max(match_threshold, noise_floor * sigma * sigma);
}

void Bm3dParams::validate() const {
  if (block_size < 1 || step < 1 || search_radius < 0 || max_group < 1) {
    throw ConfigError("bm3d sizes must be positive");
  }
  if (step > block_size) throw ConfigError("bm3d step must not exceed block_size");
  if (!std::has_single_bit(static_cast<unsigned>(max_group))) {
    throw ConfigError("bm3d max_group must be a power of two");
  }
  if (!(match_threshold > 0.0) || !(wiener_match_threshold > 0.0)) {
    throw ConfigError("bm3d match thresholds must be > 0");
  }
  if (!(noise_floor >= 0.0)) throw ConfigError("bm3d noise_floor must be >= 0");
  if (!(lambda_3d >= 0.0)) throw ConfigError("bm3d lambda_3d must be >= 0");
  if (!(sigma > 0.0)) throw ConfigError("bm3d sigma must be > 0");
}

Bm3dParams bm3d_params_from_json(const nlohmann::json& j, double sigma) {
  Bm3dParams p = Bm3dParams::for_sigma(sigma);
  p.block_size = j.value("block_size", p.block_size);
  p.step = j.value("step", p.step);
  p.search_radius = j.value("search_radius", p.search_radius);
  p.max_group = j.value("max_group", p.max_group);
  p.match_threshold = j.value("match_threshold", p.match_threshold);
  p.wiener_match_threshold = j.value("wiener_match_threshold", p.wiener_match_threshold);
  p.lambda_3d = j.value("lambda_3d", p.lambda_3d);
  p.noise_floor = j.value("noise_floor", p.noise_floor);
  p.validate();
  return p;
}

double block_distance(const Image& img, PatchOrigin a, PatchOrigin b, int block_size) {
  double acc = 0.0;
  for (int r = 0; r < block_size; ++r) {
    for (int c = 0; c < block_size; ++c) {
      const double d = img(a.row + r, a.col + c) - img(b.row + r, b.col + c);
      acc += d * d;
    }
  }
  return acc / (block_size * block_size);
}

std::vector<double> gather_stack(const Image& img, std::span<const PatchOrigin> coords, int block_size) {
  const std::size_t plane = static_cast<std::size_t>(block_size) * block_size;
  std::vector<double> stack(coords.size() * plane);
  for (std::size_t t = 0; t < coords.size(); ++t) {
    read_patch(img, coords[t], block_size, std::span<double>(stack).subspan(t * plane, plane));
  }
  return stack;
}

BlockGroup block_match(const Image& img, PatchOrigin ref, const Bm3dParams& params, double threshold) {
  const int bs = params.block_size;
  if (ref.row < 0 || ref.col < 0 || ref.row + bs > img.height() || ref.col + bs > img.width()) {
    throw SizeError("reference block outside image");
  }
  const int r0 = std::max(0, ref.row - params.search_radius);
  const int r1 = std::min(img.height() - bs, ref.row + params.search_radius);
  const int c0 = std::max(0, ref.col - params.search_radius);
  const int c1 = std::min(img.width() - bs, ref.col + params.search_radius);

  struct Candidate {
    double distance;
    PatchOrigin origin;
  };
  std::vector<Candidate> found;
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      const PatchOrigin o{r, c};
      const double d = (o == ref) ? 0.0 : block_distance(img, ref, o, bs);
      if (d <= threshold) found.push_back({d, o});
    }
  }
  std::sort(found.begin(), found.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    // Reference leads its tie class, then row-major order.
    if ((a.origin == ref) != (b.origin == ref)) return a.origin == ref;
    if (a.origin.row != b.origin.row) return a.origin.row < b.origin.row;
    return a.origin.col < b.origin.col;
  });

  const auto limit = std::min<std::size_t>(found.size(), static_cast<std::size_t>(params.max_group));
  const std::size_t keep = std::bit_floor(limit);

  BlockGroup group;
  group.block_size = bs;
  group.coords.reserve(keep);
  group.distances.reserve(keep);
  for (std::size_t t = 0; t < keep; ++t) {
    group.coords.push_back(found[t].origin);
    group.distances.push_back(found[t].distance);
  }
  group.stack = gather_stack(img, group.coords, bs);
  return group;
}

BlockGroup block_match(const Image& img, PatchOrigin ref, const Bm3dParams& params) {
  return block_match(img, ref, params, params.match_threshold);
}

void transform_3d(std::span<double> stack, int block_size, int count) {
  require_power_of_two(count);
  const std::size_t plane = static_cast<std::size_t>(block_size) * block_size;
  for (int t = 0; t < count; ++t) separable_2d(stack.subspan(t * plane, plane), block_size, false);
  haar_forward(stack, plane, count);
}

void inverse_transform_3d(std::span<double> coeffs, int block_size, int count) {
  require_power_of_two(count);
  const std::size_t plane = static_cast<std::size_t>(block_size) * block_size;
  haar_inverse(coeffs, plane, count);
  for (int t = 0; t < count; ++t) separable_2d(coeffs.subspan(t * plane, plane), block_size, true);
}

std::vector<double> transform_3d(const BlockGroup& group) {
  std::vector<double> coeffs = group.stack;
  transform_3d(coeffs, group.block_size, static_cast<int>(group.size()));
  return coeffs;
}

Image hard_threshold_stage(const Image& noisy, const Bm3dParams& params) {
  params.validate();
  check_image(noisy, params);
  const double threshold = params.lambda_3d * params.sigma;
  const double inv_var = 1.0 / (params.sigma * params.sigma);

  PatchAccumulator acc(noisy.width(), noisy.height());
  for (const PatchOrigin ref : reference_grid(noisy, params)) {
    BlockGroup group = block_match(noisy, ref, params, params.stage1_threshold());
    std::vector<double> coeffs = transform_3d(group);
    std::size_t retained = 0;
    for (double& c : coeffs) {
      if (std::abs(c) < threshold) c = 0.0;
      if (c != 0.0) ++retained;
    }
    inverse_transform_3d(coeffs, group.block_size, static_cast<int>(group.size()));
    const double weight = retained > 0 ? inv_var / static_cast<double>(retained) : 1.0;
    aggregate_group(acc, group, coeffs, weight);
  }
  return acc.resolve();
}

Image wiener_stage(const Image& noisy, const Image& basic, const Bm3dParams& params) {
  params.validate();
  if (!noisy.same_shape(basic)) throw SizeError("noisy and basic estimates differ in size");
  check_image(noisy, params);
  const double var = params.sigma * params.sigma;

  PatchAccumulator acc(noisy.width(), noisy.height());
  for (const PatchOrigin ref : reference_grid(basic, params)) {
    const BlockGroup group = block_match(basic, ref, params, params.wiener_match_threshold);
    const int count = static_cast<int>(group.size());
    std::vector<double> pilot = group.stack;
    transform_3d(pilot, group.block_size, count);
    std::vector<double> coeffs = gather_stack(noisy, group.coords, group.block_size);
    transform_3d(coeffs, group.block_size, count);

    double energy = 0.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      const double b2 = pilot[i] * pilot[i];
      const double shrink = b2 / (b2 + var);
      coeffs[i] *= shrink;
      energy += shrink * shrink;
    }
    inverse_transform_3d(coeffs, group.block_size, count);
    const double weight = energy > 0.0 ? 1.0 / (var * energy) : 1.0;
    aggregate_group(acc, group, coeffs, weight);
  }
  return acc.resolve();
}

Image denoise_bm3d(const Image& noisy, const Bm3dParams& params) {
  return wiener_stage(noisy, hard_threshold_stage(noisy, params), params);
}

}  // namespace denoise
