#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "denoise/image.hpp"

namespace denoise {

struct PatchOrigin {
  int row;
  int col;
  friend bool operator==(const PatchOrigin&, const PatchOrigin&) = default;
};

// Square patches of one image, stored contiguously: patch i occupies
// values[i * patch_size^2, (i + 1) * patch_size^2) in row-major order.
struct PatchSet {
  int patch_size = 0;
  int stride = 0;
  std::vector<PatchOrigin> origins;
  std::vector<double> values;

  std::size_t count() const { return origins.size(); }
  std::size_t patch_length() const {
    return static_cast<std::size_t>(patch_size) * static_cast<std::size_t>(patch_size);
  }
  std::span<const double> patch(std::size_t i) const {
    return std::span<const double>(values).subspan(i * patch_length(), patch_length());
  }
  std::span<double> patch(std::size_t i) {
    return std::span<double>(values).subspan(i * patch_length(), patch_length());
  }

  friend bool operator==(const PatchSet&, const PatchSet&) = default;
};

// Origins 0, stride, 2*stride, ... that fit, plus length - patch when the
// regular grid leaves the trailing pixels uncovered.
std::vector<int> axis_origins(int length, int patch, int stride);

// Row-major enumeration of every origin on the snapped grid.
PatchSet extract_patches(const Image& img, int patch_size, int stride);

void read_patch(const Image& img, PatchOrigin origin, int patch_size, std::span<double> out);

// Per-pixel weighted sums; the order in which patches are added does not
// change the result beyond floating-point summation order.
class PatchAccumulator {
 public:
  PatchAccumulator(int width, int height);

  void add(PatchOrigin origin, int patch_size, std::span<const double> values, double weight);

  int width() const { return width_; }
  int height() const { return height_; }
  std::span<const double> numerator() const { return numerator_; }
  std::span<const double> denominator() const { return denominator_; }

  // numerator / denominator; throws CoverageError on any uncovered pixel.
  Image resolve() const;

 private:
  int width_;
  int height_;
  std::vector<double> numerator_;
  std::vector<double> denominator_;
};

Image aggregate_patches(const PatchSet& patches, std::span<const double> weights, int width,
                        int height);

}  // namespace denoise
