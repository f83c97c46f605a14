#include "denoise/patches.hpp"

#include <algorithm>
#include <string>

#include "denoise/error.hpp"

namespace denoise {

std::vector<int> axis_origins(int length, int patch, int stride) {
  if (patch < 1 || patch > length) {
    throw SizeError("patch size " + std::to_string(patch) + " does not fit in extent " +
                    std::to_string(length));
  }
  if (stride < 1) throw SizeError("stride must be at least 1");
  std::vector<int> out;
  for (int o = 0; o + patch <= length; o += stride) out.push_back(o);
  if (out.back() != length - patch) out.push_back(length - patch);
  return out;
}

void read_patch(const Image& img, PatchOrigin origin, int patch_size, std::span<double> out) {
  for (int r = 0; r < patch_size; ++r)
    for (int c = 0; c < patch_size; ++c)
      out[static_cast<std::size_t>(r * patch_size + c)] = img(origin.row + r, origin.col + c);
}

PatchSet extract_patches(const Image& img, int patch_size, int stride) {
  if (patch_size > std::min(img.width(), img.height())) {
    throw SizeError("patch size " + std::to_string(patch_size) + " exceeds image " +
                    std::to_string(img.width()) + "x" + std::to_string(img.height()));
  }
  const auto rows = axis_origins(img.height(), patch_size, stride);
  const auto cols = axis_origins(img.width(), patch_size, stride);

  PatchSet set;
  set.patch_size = patch_size;
  set.stride = stride;
  set.origins.reserve(rows.size() * cols.size());
  for (int r : rows)
    for (int c : cols) set.origins.push_back({r, c});
  set.values.resize(set.origins.size() * set.patch_length());
  for (std::size_t i = 0; i < set.origins.size(); ++i) {
    read_patch(img, set.origins[i], patch_size, set.patch(i));
  }
  return set;
}

PatchAccumulator::PatchAccumulator(int width, int height)
    : width_(width),
      height_(height),
      numerator_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0.0),
      denominator_(numerator_.size(), 0.0) {}

void PatchAccumulator::add(PatchOrigin origin, int patch_size, std::span<const double> values,
                           double weight) {
  for (int r = 0; r < patch_size; ++r) {
    const std::size_t base =
        static_cast<std::size_t>(origin.row + r) * static_cast<std::size_t>(width_) +
        static_cast<std::size_t>(origin.col);
    for (int c = 0; c < patch_size; ++c) {
      numerator_[base + c] += weight * values[static_cast<std::size_t>(r * patch_size + c)];
      denominator_[base + c] += weight;
    }
  }
}

Image PatchAccumulator::resolve() const {
  Image out(width_, height_);
  auto px = out.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (!(denominator_[i] > 0.0)) {
      throw CoverageError("pixel (" + std::to_string(i / width_) + ", " +
                          std::to_string(i % width_) + ") is not covered by any patch");
    }
    px[i] = numerator_[i] / denominator_[i];
  }
  return out;
}

Image aggregate_patches(const PatchSet& patches, std::span<const double> weights, int width,
                        int height) {
  if (weights.size() != patches.count()) {
    throw SizeError("expected one weight per patch");
  }
  PatchAccumulator acc(width, height);
  for (std::size_t i = 0; i < patches.count(); ++i) {
    const PatchOrigin o = patches.origins[i];
    if (o.row < 0 || o.col < 0 || o.row + patches.patch_size > height ||
        o.col + patches.patch_size > width) {
      throw SizeError("patch at (" + std::to_string(o.row) + ", " + std::to_string(o.col) +
                      ") falls outside the canvas");
    }
    if (!(weights[i] > 0.0)) throw SizeError("aggregation weights must be positive");
    acc.add(o, patches.patch_size, patches.patch(i), weights[i]);
  }
  return acc.resolve();
}

}  // namespace denoise
