#include "denoise/bench.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <thread>

#include "denoise/bm3d.hpp"
#include "denoise/error.hpp"
#include "denoise/ksvd.hpp"
#include "denoise/metrics.hpp"
#include "denoise/nlm.hpp"
#include "denoise/noise.hpp"

namespace denoise {

namespace fs = std::filesystem;

namespace {

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  return (p.is_absolute() || base.empty()) ? p : base / p;
}

template <typename T>
bool contains_or_empty(const std::vector<T>& filter, const T& value) {
  return filter.empty() || std::find(filter.begin(), filter.end(), value) != filter.end();
}

struct Triple {
  std::size_t entry;
  int size;
  double sigma;
  std::optional<Image> noisy;  // empty when the image failed to load
};

struct Job {
  std::size_t triple;
  Algorithm algorithm;
};

}  // namespace

std::string_view to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::noisy: return "noisy";
    case Algorithm::nlmeans: return "nlmeans";
    case Algorithm::ksvd: return "ksvd";
    case Algorithm::bm3d: return "bm3d";
  }
  return "noisy";
}

std::string_view display_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::noisy: return "Noisy";
    case Algorithm::nlmeans: return "NL-means";
    case Algorithm::ksvd: return "K-SVD";
    case Algorithm::bm3d: return "BM3D";
  }
  return "Noisy";
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "nlmeans" || name == "nlm") return Algorithm::nlmeans;
  if (name == "ksvd") return Algorithm::ksvd;
  if (name == "bm3d") return Algorithm::bm3d;
  if (name == "noisy") return Algorithm::noisy;
  throw ConfigError("unknown algorithm '" + std::string(name) + "' (expected nlmeans|ksvd|bm3d)");
}

void BenchConfig::validate() const {
  if (sizes.empty()) throw ConfigError("bench config: sizes must not be empty");
  if (sigmas.empty()) throw ConfigError("bench config: sigmas must not be empty");
  if (algorithms.empty()) throw ConfigError("bench config: algorithms must not be empty");
  for (int s : sizes) {
    if (s != 64 && s != 128 && s != 256) {
      throw ConfigError("bench config: size " + std::to_string(s) + " is not one of 64, 128, 256");
    }
  }
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (!(sigmas[i] > 0.0)) throw ConfigError("bench config: sigmas must be > 0");
    if (i > 0 && !(sigmas[i] > sigmas[i - 1])) {
      throw ConfigError("bench config: sigmas must be strictly increasing");
    }
  }
  for (Algorithm a : algorithms) {
    if (a == Algorithm::noisy) throw ConfigError("bench config: 'noisy' is not a denoiser");
  }
  if (workers < 0) throw ConfigError("bench config: workers must be >= 0");
}

nlohmann::json BenchConfig::to_json() const {
  nlohmann::json algos = nlohmann::json::array();
  for (Algorithm a : algorithms) algos.push_back(std::string(to_string(a)));
  return {{"manifest", manifest_path.string()},
          {"sizes", sizes},
          {"sigmas", sigmas},
          {"algorithms", algos},
          {"seed", seed},
          {"nlm", nlm},
          {"ksvd", ksvd},
          {"bm3d", bm3d},
          {"output_dir", output_dir.string()},
          {"datasets", datasets},
          {"images", images},
          {"record_wall_time", record_wall_time},
          {"montages", montages}};
}

BenchConfig bench_config_from_json(const nlohmann::json& j, const fs::path& base_dir) {
  BenchConfig c;
  try {
    c.manifest_path = resolve(j.at("manifest").get<std::string>(), base_dir);
    if (j.contains("sizes")) c.sizes = j.at("sizes").get<std::vector<int>>();
    if (j.contains("sigmas")) c.sigmas = j.at("sigmas").get<std::vector<double>>();
    if (j.contains("algorithms")) {
      c.algorithms.clear();
      for (const auto& a : j.at("algorithms")) c.algorithms.push_back(parse_algorithm(a.get<std::string>()));
    }
    c.seed = j.value("seed", c.seed);
    c.nlm = j.value("nlm", c.nlm);
    c.ksvd = j.value("ksvd", c.ksvd);
    c.bm3d = j.value("bm3d", c.bm3d);
    c.output_dir = resolve(j.value("output_dir", c.output_dir.string()), base_dir);
    c.datasets = j.value("datasets", c.datasets);
    c.images = j.value("images", c.images);
    c.record_wall_time = j.value("record_wall_time", c.record_wall_time);
    c.montages = j.value("montages", c.montages);
    c.workers = j.value("workers", c.workers);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bench config: ") + e.what());
  }
  for (const auto& d : c.datasets) parse_dataset_kind(d);
  c.validate();
  return c;
}

BenchConfig load_bench_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open bench config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return bench_config_from_json(j, path.parent_path());
}

std::uint64_t cell_seed(std::uint64_t seed, std::string_view image, int size, double sigma) {
  const auto size_bits = static_cast<std::uint64_t>(static_cast<std::uint32_t>(size));
  return rng::hash(rng::hash(seed, fnv1a(image), size_bits), std::bit_cast<std::uint64_t>(sigma), 0);
}

std::string config_hash(const BenchConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(config.to_json().dump())));
  return buf;
}

int resolve_worker_count(const BenchConfig& config) {
  int n = config.workers;
  if (n <= 0) {
    if (const char* env = std::getenv(kWorkersEnv); env && *env) n = std::atoi(env);
  }
  if (n <= 0) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return n;
}

Image run_algorithm(Algorithm algo, const Image& noisy, double sigma, const BenchConfig& config) {
  switch (algo) {
    case Algorithm::noisy: return noisy;
    case Algorithm::nlmeans: return denoise_nlm(noisy, nlm_params_from_json(config.nlm, sigma));
    case Algorithm::ksvd: return denoise_ksvd(noisy, ksvd_params_from_json(config.ksvd, sigma));
    case Algorithm::bm3d: return denoise_bm3d(noisy, bm3d_params_from_json(config.bm3d, sigma));
  }
  throw ConfigError("unknown algorithm");
}

BenchReport run_benchmark(const BenchConfig& config, const OutputSink& sink) {
  config.validate();
  // Resolve parameter blocks up front so a bad override aborts before any work.
  nlm_params_from_json(config.nlm, config.sigmas.front());
  ksvd_params_from_json(config.ksvd, config.sigmas.front());
  bm3d_params_from_json(config.bm3d, config.sigmas.front());

  std::vector<ManifestEntry> entries;
  for (auto& e : load_manifest(config.manifest_path)) {
    if (contains_or_empty(config.datasets, std::string(to_string(e.dataset))) &&
        contains_or_empty(config.images, e.name)) {
      entries.push_back(std::move(e));
    }
  }

  BenchReport report;
  report.provenance = {config_hash(config), config.seed, std::string(kToolVersion)};

  // Clean images per (entry, size); one noisy realization per triple.
  std::map<std::pair<std::size_t, int>, Image> cleans;
  std::vector<Triple> triples;
  for (std::size_t e = 0; e < entries.size(); ++e) {
    std::optional<Image> source;
    try {
      source = load_image(entries[e].path);
    } catch (const Error& err) {
      report.errors.push_back({entries[e].name, err.what()});
      continue;
    }
    for (int size : config.sizes) {
      try {
        cleans.emplace(std::make_pair(e, size), resize_to(*source, size));
      } catch (const Error& err) {
        report.errors.push_back({entries[e].name, err.what()});
        continue;
      }
      const Image& clean = cleans.at({e, size});
      for (double sigma : config.sigmas) {
        const NoiseSpec spec = NoiseSpec::awgn(sigma, cell_seed(config.seed, entries[e].name, size, sigma));
        triples.push_back({e, size, sigma, awgn(clean, spec)});
      }
    }
  }

  std::vector<Job> jobs;
  for (std::size_t t = 0; t < triples.size(); ++t)
    for (Algorithm a : config.algorithms) jobs.push_back({t, a});

  struct JobResult {
    std::optional<MetricPair> metrics;
    std::optional<Image> output;  // kept only when a sink wants it
    double wall_ms = 0.0;
    std::string error;
  };
  std::vector<JobResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const Triple& tr = triples[jobs[j].triple];
      const auto start = std::chrono::steady_clock::now();
      try {
        Image out = run_algorithm(jobs[j].algorithm, *tr.noisy, tr.sigma, config);
        const auto stop = std::chrono::steady_clock::now();
        results[j].wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
        results[j].metrics = evaluate(clipped(cleans.at({tr.entry, tr.size})), clipped(out));
        if (sink) results[j].output = std::move(out);
      } catch (const std::exception& err) {
        results[j].error = err.what();
      }
    }
  };
  const int n_workers = std::min<int>(resolve_worker_count(config), static_cast<int>(std::max<std::size_t>(jobs.size(), 1)));
  std::vector<std::thread> pool;
  for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  // Score in job order after the barrier.
  std::size_t j = 0;
  for (std::size_t t = 0; t < triples.size(); ++t) {
    const Triple& tr = triples[t];
    const ManifestEntry& entry = entries[tr.entry];
    const Image& clean = cleans.at({tr.entry, tr.size});
    const Image clean_clipped = clipped(clean);
    const std::string dataset(to_string(entry.dataset));

    const MetricPair noisy_m = evaluate(clean_clipped, clipped(*tr.noisy));
    report.cells.push_back({dataset, entry.name, tr.size, tr.sigma, Algorithm::noisy, noisy_m.psnr, noisy_m.ssim, 0.0});

    TripleOutputs outputs{dataset, entry.name, tr.size, tr.sigma, clean, *tr.noisy, {}};
    for (; j < jobs.size() && jobs[j].triple == t; ++j) {
      JobResult& res = results[j];
      if (!res.metrics) {
        report.errors.push_back({entry.name, std::string(to_string(jobs[j].algorithm)) + ": " + res.error});
        continue;
      }
      const MetricPair m = *res.metrics;
      report.cells.push_back({dataset, entry.name, tr.size, tr.sigma, jobs[j].algorithm, m.psnr, m.ssim,
                              config.record_wall_time ? res.wall_ms : 0.0});
      if (res.output) outputs.outputs.emplace(jobs[j].algorithm, std::move(*res.output));
    }
    if (sink) sink(outputs);
  }
  return report;
}

}  // namespace denoise
