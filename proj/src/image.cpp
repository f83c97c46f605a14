#include "denoise/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "denoise/error.hpp"

namespace denoise {

namespace {

void check_shape(int width, int height, std::size_t len) {
  if (width < 1 || height < 1) {
    throw SizeError("image dimensions must be positive, got " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
  if (len != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw SizeError("pixel buffer length " + std::to_string(len) + " does not match " +
                    std::to_string(width) + "x" + std::to_string(height));
  }
}

// Row i of the returned matrix holds the weights of source samples for output
// sample i: overlap of [i*f, (i+1)*f) with each unit source cell, divided by f.
std::vector<std::vector<std::pair<int, double>>> area_weights(int src, int dst) {
  std::vector<std::vector<std::pair<int, double>>> rows(dst);
  const double f = static_cast<double>(src) / dst;
  for (int i = 0; i < dst; ++i) {
    const double lo = i * f;
    const double hi = (i + 1) * f;
    const int first = static_cast<int>(std::floor(lo));
    const int last = std::min(src - 1, static_cast<int>(std::ceil(hi)) - 1);
    for (int s = first; s <= last; ++s) {
      const double overlap = std::min(hi, s + 1.0) - std::max(lo, static_cast<double>(s));
      if (overlap > 0.0) rows[i].emplace_back(s, overlap / f);
    }
  }
  return rows;
}

}  // namespace

Image::Image(int width, int height, double fill)
    : width_(width), height_(height) {
  check_shape(width, height, static_cast<std::size_t>(std::max(width, 0)) *
                                 static_cast<std::size_t>(std::max(height, 0)));
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

Image::Image(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  check_shape(width, height, data_.size());
}

Image clipped(const Image& img) {
  Image out = img;
  for (double& v : out.pixels()) v = std::clamp(v, 0.0, 255.0);
  return out;
}

Image mirrored_horizontally(const Image& img) {
  Image out(img.width(), img.height());
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < img.width(); ++c) out(r, c) = img(r, img.width() - 1 - c);
  return out;
}

Image mirrored_vertically(const Image& img) {
  Image out(img.width(), img.height());
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < img.width(); ++c) out(r, c) = img(img.height() - 1 - r, c);
  return out;
}

Image center_crop_square(const Image& img) {
  const int edge = std::min(img.width(), img.height());
  const int r0 = (img.height() - edge) / 2;
  const int c0 = (img.width() - edge) / 2;
  Image out(edge, edge);
  for (int r = 0; r < edge; ++r)
    for (int c = 0; c < edge; ++c) out(r, c) = img(r0 + r, c0 + c);
  return out;
}

Image resize_to(const Image& img, int target) {
  if (target < 1) throw SizeError("resize target must be positive");
  const Image square = center_crop_square(img);
  const int src = square.width();
  if (src < target) {
    throw SizeError("source edge " + std::to_string(src) + " is smaller than target " +
                    std::to_string(target));
  }
  if (src == target) return square;

  const auto weights = area_weights(src, target);

  // Horizontal pass, then vertical.
  Image tmp(target, src);
  for (int r = 0; r < src; ++r) {
    for (int c = 0; c < target; ++c) {
      double acc = 0.0;
      for (const auto& [s, w] : weights[c]) acc += w * square(r, s);
      tmp(r, c) = acc;
    }
  }
  Image out(target, target);
  for (int r = 0; r < target; ++r) {
    for (int c = 0; c < target; ++c) {
      double acc = 0.0;
      for (const auto& [s, w] : weights[r]) acc += w * tmp(s, c);
      out(r, c) = acc;
    }
  }
  return out;
}

}  // namespace denoise
