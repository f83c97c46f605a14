#include "denoise/nlm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "denoise/error.hpp"

namespace denoise {

namespace {

// Image extended by `pad` pixels on every side with symmetric reflection.
struct PaddedImage {
  int pad;
  int width;
  int height;
  std::vector<double> data;

  PaddedImage(const Image& img, int pad_)
      : pad(pad_), width(img.width() + 2 * pad_), height(img.height() + 2 * pad_),
        data(static_cast<std::size_t>(width) * height) {
    for (int r = 0; r < height; ++r) {
      const int sr = reflect_index(r - pad, img.height());
      for (int c = 0; c < width; ++c) {
        data[static_cast<std::size_t>(r) * width + c] = img(sr, reflect_index(c - pad, img.width()));
      }
    }
  }

  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * width + c]; }
};

// Patch sums of squared differences between every pixel and its neighbour at
// (dy, dx), via a summed-area table over the patch-reach region.
class OffsetDistances {
 public:
  OffsetDistances(const PaddedImage& padded, int img_width, int img_height, int patch_radius)
      : padded_(padded),
        w_(img_width),
        h_(img_height),
        r_(patch_radius),
        rw_(img_width + 2 * patch_radius),
        rh_(img_height + 2 * patch_radius),
        table_(static_cast<std::size_t>(rw_ + 1) * (rh_ + 1), 0.0) {}

  // Fills out[row * width + col] with the patch sum for offset (dy, dx).
  void compute(int dy, int dx, std::vector<double>& out) {
    const int base = padded_.pad - r_;
    const std::size_t stride = static_cast<std::size_t>(rw_) + 1;
    for (int y = 0; y < rh_; ++y) {
      double row_sum = 0.0;
      for (int x = 0; x < rw_; ++x) {
        const double d = padded_.at(base + y, base + x) - padded_.at(base + y + dy, base + x + dx);
        row_sum += d * d;
        table_[(y + 1) * stride + (x + 1)] = table_[y * stride + (x + 1)] + row_sum;
      }
    }
    const int span = 2 * r_ + 1;
    out.resize(static_cast<std::size_t>(w_) * h_);
    for (int r = 0; r < h_; ++r) {
      for (int c = 0; c < w_; ++c) {
        out[static_cast<std::size_t>(r) * w_ + c] =
            table_[(r + span) * stride + (c + span)] - table_[r * stride + (c + span)] -
            table_[(r + span) * stride + c] + table_[r * stride + c];
      }
    }
  }

 private:
  const PaddedImage& padded_;
  int w_, h_, r_, rw_, rh_;
  std::vector<double> table_;
};

}  // namespace

NlmParams NlmParams::for_sigma(double sigma, double h_factor) {
  NlmParams p;
  p.sigma = sigma;
  p.h = h_factor * sigma;
  return p;
}

void NlmParams::validate() const {
  if (patch_radius < 1) throw ConfigError("nlm patch_radius must be >= 1");
  if (search_radius < patch_radius) throw ConfigError("nlm search_radius must be >= patch_radius");
  if (!(h > 0.0)) throw ConfigError("nlm h must be > 0");
  if (!(sigma >= 0.0)) throw ConfigError("nlm sigma must be >= 0");
}

NlmParams nlm_params_from_json(const nlohmann::json& j, double sigma) {
  NlmParams p = NlmParams::for_sigma(sigma, j.value("h_factor", 0.55));
  p.patch_radius = j.value("patch_radius", p.patch_radius);
  p.search_radius = j.value("search_radius", p.search_radius);
  p.validate();
  return p;
}

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

double patch_distance(const Image& img, int p_row, int p_col, int q_row, int q_col, int radius) {
  double acc = 0.0;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      const double a = img(reflect_index(p_row + dy, img.height()), reflect_index(p_col + dx, img.width()));
      const double b = img(reflect_index(q_row + dy, img.height()), reflect_index(q_col + dx, img.width()));
      acc += (a - b) * (a - b);
    }
  }
  const int side = 2 * radius + 1;
  return acc / (side * side);
}

Image denoise_nlm(const Image& noisy, const NlmParams& params) {
  params.validate();
  const int min_edge = 2 * params.patch_radius + 1;
  if (noisy.width() < min_edge || noisy.height() < min_edge) {
    throw SizeError("image " + std::to_string(noisy.width()) + "x" + std::to_string(noisy.height()) +
                    " is smaller than the " + std::to_string(min_edge) + "-pixel patch");
  }

  const int w = noisy.width();
  const int h = noisy.height();
  const int radius = params.search_radius;
  const PaddedImage padded(noisy, radius + params.patch_radius);
  OffsetDistances distances(padded, w, h, params.patch_radius);

  const std::size_t n = static_cast<std::size_t>(w) * h;
  const int side = 2 * params.patch_radius + 1;
  const double inv_area = 1.0 / (side * side);
  const double bias = 2.0 * params.sigma * params.sigma;
  const double inv_h2 = 1.0 / (params.h * params.h);

  std::vector<double> weight_sum(n, 0.0);
  std::vector<double> value_sum(n, 0.0);
  std::vector<double> max_weight(n, 0.0);

  // The (up to four) offsets (+-dy, +-dx) are combined as
  // ((w0 + w1) + (w2 + w3)) before entering the running sums, so mirroring the
  // input in either axis permutes the summands without changing the result.
  std::array<std::vector<double>, 4> group_dist;
  std::array<std::pair<int, int>, 4> group;
  for (int ady = 0; ady <= radius; ++ady) {
    for (int adx = 0; adx <= radius; ++adx) {
      if (ady == 0 && adx == 0) continue;
      int count = 0;
      for (int sy : {1, -1}) {
        if (ady == 0 && sy < 0) continue;
        for (int sx : {1, -1}) {
          if (adx == 0 && sx < 0) continue;
          group[count++] = {sy * ady, sx * adx};
        }
      }
      for (int g = 0; g < count; ++g) distances.compute(group[g].first, group[g].second, group_dist[g]);

      for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
          const std::size_t i = static_cast<std::size_t>(r) * w + c;
          std::array<double, 4> wt{};
          std::array<double, 4> wv{};
          for (int g = 0; g < count; ++g) {
            const double d2 = group_dist[g][i] * inv_area;
            const double weight = std::exp(-std::max(d2 - bias, 0.0) * inv_h2);
            const double value =
                padded.at(r + padded.pad + group[g].first, c + padded.pad + group[g].second);
            wt[g] = weight;
            wv[g] = weight * value;
            max_weight[i] = std::max(max_weight[i], weight);
          }
          weight_sum[i] += (wt[0] + wt[1]) + (wt[2] + wt[3]);
          value_sum[i] += (wv[0] + wv[1]) + (wv[2] + wv[3]);
        }
      }
    }
  }

  Image out(w, h);
  auto px = out.pixels();
  const auto in = noisy.pixels();
  for (std::size_t i = 0; i < n; ++i) {
    const double total = weight_sum[i] + max_weight[i];
    px[i] = total > 0.0 ? (value_sum[i] + max_weight[i] * in[i]) / total : in[i];
  }
  return out;
}

}  // namespace denoise
