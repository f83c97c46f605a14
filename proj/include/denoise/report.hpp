#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "denoise/bench.hpp"
#include "denoise/image.hpp"
#include "denoise/metrics.hpp"

namespace denoise {

// "34.24/0.71"; infinite PSNR renders as "inf".
std::string format_cell(double psnr, double ssim);
std::string format_psnr(double psnr);

// Cells sorted by (dataset, image, size, sigma, algorithm order).
std::vector<BenchCell> sorted_cells(const BenchReport& report);

// Header `dataset,image,size,sigma,algorithm,psnr_db,ssim,wall_ms`.
std::string format_csv(const BenchReport& report);
void emit_csv(const BenchReport& report, const std::filesystem::path& path);

// One table for a (dataset, size) slice: sigma-major rows with Noisy,
// NL-means, K-SVD and BM3D sub-rows, one column per image.
std::string emit_markdown_table(const BenchReport& report, const std::string& dataset, int size);

struct SeriesFiles {
  std::filesystem::path psnr;
  std::filesystem::path ssim;
};

// Writes <dataset>_<size>_<image>_psnr.tsv and ..._ssim.tsv into dir: a
// sigma column followed by one column per algorithm present in the slice.
SeriesFiles emit_plot_series(const BenchReport& report, const std::string& dataset, int size,
                             const std::string& image, const std::filesystem::path& dir);

inline constexpr int kMontageSeparator = 4;

struct MontagePanel {
  std::string label;
  const Image* image;
};

// Panels left to right with white separators.
Image compose_montage(const std::vector<MontagePanel>& panels);

// clean | noisy | NL-means | K-SVD | BM3D (whichever outputs are given) as a
// PNG, plus a JSON sidecar (same stem, .json) with each panel's label and
// PSNR/SSIM against the clean image.
void emit_montage(const Image& clean, const Image& noisy, const std::map<Algorithm, Image>& outputs,
                  const std::filesystem::path& path);

nlohmann::json provenance_json(const BenchReport& report);

}  // namespace denoise
