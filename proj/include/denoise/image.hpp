#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace denoise {

// Grayscale image with real-valued intensities, row-major. Nominal range is
// [0, 255] but values are not clamped; quantization happens on export.
class Image {
 public:
  Image(int width, int height, double fill = 0.0);
  Image(int width, int height, std::vector<double> data);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }

  double operator()(int row, int col) const { return data_[index(row, col)]; }
  double& operator()(int row, int col) { return data_[index(row, col)]; }

  std::span<const double> pixels() const { return data_; }
  std::span<double> pixels() { return data_; }

  bool same_shape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int width_;
  int height_;
  std::vector<double> data_;
};

// Copy with every value clamped to [0, 255].
Image clipped(const Image& img);

// Rec. 601 luma.
inline double luma601(double r, double g, double b) {
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

Image mirrored_horizontally(const Image& img);
Image mirrored_vertically(const Image& img);

// Largest centered square sub-image.
Image center_crop_square(const Image& img);

// Center-crop to square, then area-average down to target x target.
// Throws SizeError when the cropped square is smaller than target.
Image resize_to(const Image& img, int target);

}  // namespace denoise
