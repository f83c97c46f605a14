#pragma once

#include <nlohmann/json_fwd.hpp>

#include "denoise/image.hpp"

namespace denoise {

// Pixelwise non-local means with a windowed search.
//
// Weight of candidate q for pixel p:
//   w(p, q) = exp(-max(d2(p, q) - 2 sigma^2, 0) / h^2)
// where d2 is the mean squared difference between the (2r+1)^2 patches
// centred on p and q. The self weight is replaced by the largest weight of
// any other candidate. Borders use symmetric reflection.
struct NlmParams {
  int patch_radius = 3;
  int search_radius = 10;
  double h = 0.0;
  double sigma = 0.0;

  // Defaults with h = h_factor * sigma.
  static NlmParams for_sigma(double sigma, double h_factor = 0.55);

  void validate() const;
};

// Reads "patch_radius", "search_radius", "h_factor" overrides (all optional).
NlmParams nlm_params_from_json(const nlohmann::json& j, double sigma);

// Symmetric ("half-sample") reflection of an index into [0, n).
int reflect_index(int i, int n);

// Mean squared difference between the patches centred on p and q.
double patch_distance(const Image& img, int p_row, int p_col, int q_row, int q_col, int radius);

Image denoise_nlm(const Image& noisy, const NlmParams& params);

}  // namespace denoise
