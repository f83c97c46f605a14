#pragma once

#include <nlohmann/json_fwd.hpp>
#include <span>
#include <vector>

#include "denoise/image.hpp"
#include "denoise/patches.hpp"

namespace denoise {

struct Bm3dParams {
  int block_size = 8;
  int step = 3;            // reference-block stride
  int search_radius = 19;  // (2r+1)^2 candidate window
  int max_group = 16;      // power of two
  double match_threshold = 3000.0;         // stage 1, mean squared block distance
  double wiener_match_threshold = 400.0;   // stage 2, on the basic estimate
  double lambda_3d = 2.7;
  // Stage-1 cutoff never drops below noise_floor * sigma^2. Two noisy copies
  // of one block sit at 2 sigma^2 on average, so a fixed 3000 starves the
  // groups once sigma passes ~35. 0 disables.
  double noise_floor = 2.5;
  double sigma = 0.0;

  static Bm3dParams for_sigma(double sigma);
  double stage1_threshold() const;
  void validate() const;
};

// Optional overrides: block_size, step, search_radius, max_group,
// match_threshold, wiener_match_threshold, lambda_3d, noise_floor.
Bm3dParams bm3d_params_from_json(const nlohmann::json& j, double sigma);

// Matched blocks sorted by ascending distance (ties row-major), reference
// first. stack holds the blocks in the same order, block_size^2 values each.
struct BlockGroup {
  int block_size = 0;
  std::vector<PatchOrigin> coords;
  std::vector<double> distances;
  std::vector<double> stack;

  std::size_t size() const { return coords.size(); }
};

// Mean squared difference between two blocks.
double block_distance(const Image& img, PatchOrigin a, PatchOrigin b, int block_size);

// All candidates on the unit grid within search_radius of ref whose distance
// is <= threshold, truncated to the largest power of two <= min(count, max_group).
BlockGroup block_match(const Image& img, PatchOrigin ref, const Bm3dParams& params,
                       double threshold);
BlockGroup block_match(const Image& img, PatchOrigin ref, const Bm3dParams& params);

// Copies the blocks at coords out of img into a contiguous stack.
std::vector<double> gather_stack(const Image& img, std::span<const PatchOrigin> coords, int block_size);

// Orthonormal 2D DCT-II per block followed by an orthonormal Haar transform
// along the stack. count must be a power of two.
void transform_3d(std::span<double> stack, int block_size, int count);
void inverse_transform_3d(std::span<double> coeffs, int block_size, int count);

std::vector<double> transform_3d(const BlockGroup& group);

Image hard_threshold_stage(const Image& noisy, const Bm3dParams& params);
Image wiener_stage(const Image& noisy, const Image& basic, const Bm3dParams& params);
Image denoise_bm3d(const Image& noisy, const Bm3dParams& params);

}  // namespace denoise
