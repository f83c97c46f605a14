#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "denoise/image.hpp"
#include "denoise/image_io.hpp"

namespace denoise {

inline constexpr std::string_view kToolVersion = "0.3.0";

// Environment variable capping the benchmark worker count.
inline constexpr const char* kWorkersEnv = "DENOISE_WORKERS";

// Report order: noisy, nlmeans, ksvd, bm3d.
enum class Algorithm { noisy = 0, nlmeans = 1, ksvd = 2, bm3d = 3 };

std::string_view to_string(Algorithm algo);
std::string_view display_name(Algorithm algo);  // "Noisy", "NL-means", "K-SVD", "BM3D"
// Accepts "nlmeans"/"nlm", "ksvd", "bm3d" (and "noisy").
Algorithm parse_algorithm(std::string_view name);

struct BenchConfig {
  std::filesystem::path manifest_path;
  std::vector<int> sizes{64, 128, 256};
  std::vector<double> sigmas{5, 20, 35, 50, 65, 80, 95, 100};
  std::vector<Algorithm> algorithms{Algorithm::nlmeans, Algorithm::ksvd, Algorithm::bm3d};
  std::uint64_t seed = 0;
  nlohmann::json nlm = nlohmann::json::object();
  nlohmann::json ksvd = nlohmann::json::object();
  nlohmann::json bm3d = nlohmann::json::object();
  std::filesystem::path output_dir = "bench_out";
  std::vector<std::string> datasets;  // empty: all
  std::vector<std::string> images;    // empty: all
  bool record_wall_time = true;
  bool montages = false;
  int workers = 0;  // 0: DENOISE_WORKERS or hardware concurrency

  // Throws ConfigError on empty sizes/sigmas/algorithms, non-increasing
  // sigmas, unsupported sizes, or a non-positive sigma.
  void validate() const;
  nlohmann::json to_json() const;
};

// Relative manifest and output paths resolve against base_dir.
BenchConfig bench_config_from_json(const nlohmann::json& j,
                                   const std::filesystem::path& base_dir = {});
BenchConfig load_bench_config(const std::filesystem::path& path);

struct BenchCell {
  std::string dataset;
  std::string image;
  int size = 0;
  double sigma = 0.0;
  Algorithm algorithm = Algorithm::noisy;
  double psnr = 0.0;
  double ssim = 0.0;
  double wall_ms = 0.0;
};

struct BenchIssue {
  std::string image;
  std::string message;
};

struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string tool_version;
};

struct BenchReport {
  std::vector<BenchCell> cells;
  std::vector<BenchIssue> errors;
  Provenance provenance;
};

// Everything produced for one (image, size, sigma) triple.
struct TripleOutputs {
  std::string dataset;
  std::string image;
  int size;
  double sigma;
  const Image& clean;
  const Image& noisy;
  std::map<Algorithm, Image> outputs;
};
using OutputSink = std::function<void(const TripleOutputs&)>;

// Stable per-(image, size, sigma) noise seed; independent of run order.
std::uint64_t cell_seed(std::uint64_t seed, std::string_view image, int size, double sigma);

std::string config_hash(const BenchConfig& config);

int resolve_worker_count(const BenchConfig& config);

// Runs one denoiser with the config's parameter overrides for this sigma.
Image run_algorithm(Algorithm algo, const Image& noisy, double sigma, const BenchConfig& config);

// Load, resize, corrupt once per (image, size, sigma), fan out to every
// algorithm, score against the clean image (both clipped to [0, 255]).
// Unloadable images are recorded in report.errors and skipped. The sink, if
// given, is called after all jobs finish, in report order.
BenchReport run_benchmark(const BenchConfig& config, const OutputSink& sink = {});

}  // namespace denoise
