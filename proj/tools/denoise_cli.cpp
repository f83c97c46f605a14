// Command-line front end: corrupt, denoise, metrics, bench, montage.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <set>
#include <string>
#include <vector>

#include "denoise/bench.hpp"
#include "denoise/bm3d.hpp"
#include "denoise/error.hpp"
#include "denoise/image_io.hpp"
#include "denoise/ksvd.hpp"
#include "denoise/metrics.hpp"
#include "denoise/nlm.hpp"
#include "denoise/noise.hpp"
#include "denoise/report.hpp"

namespace fs = std::filesystem;
using namespace denoise;

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

// "key=value" pairs into a JSON object; values parse as JSON when possible.
nlohmann::json parse_overrides(const std::vector<std::string>& pairs) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& kv : pairs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw CLI::ValidationError("--param", "expected key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    try {
      j[key] = nlohmann::json::parse(value);
    } catch (const nlohmann::json::exception&) {
      j[key] = value;
    }
  }
  return j;
}

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string sigma_tag(double sigma) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", sigma);
  return buf;
}

struct CorruptArgs {
  std::string input, output, family = "awgn";
  double sigma = 0.0, density = 0.0, variance = 0.0;
  std::uint64_t seed = 0;
};

int run_corrupt(const CorruptArgs& a) {
  const Image img = load_image(a.input);
  NoiseSpec spec;
  if (a.family == "awgn") {
    spec = NoiseSpec::awgn(a.sigma, a.seed);
  } else if (a.family == "salt_pepper") {
    spec = NoiseSpec::salt_pepper(a.density, a.seed);
  } else {
    spec = NoiseSpec::speckle(a.variance, a.seed);
  }
  save_image(corrupt(img, spec), a.output);
  return 0;
}

struct DenoiseArgs {
  std::string input, output, algo, params_file, dump_dictionary;
  double sigma = 0.0;
  std::vector<std::string> overrides;
};

int run_denoise(const DenoiseArgs& a) {
  const Image noisy = load_image(a.input);
  nlohmann::json params = a.params_file.empty() ? nlohmann::json::object() : read_json_file(a.params_file);
  params.update(parse_overrides(a.overrides));
  const Algorithm algo = parse_algorithm(a.algo);
  if (algo == Algorithm::noisy) throw ConfigError("'noisy' is not a denoiser");
  if (!a.dump_dictionary.empty() && algo != Algorithm::ksvd) {
    throw ConfigError("--dump-dictionary only applies to ksvd");
  }

  Image out = noisy;
  switch (algo) {
    case Algorithm::nlmeans: out = denoise_nlm(noisy, nlm_params_from_json(params, a.sigma)); break;
    case Algorithm::bm3d: out = denoise_bm3d(noisy, bm3d_params_from_json(params, a.sigma)); break;
    case Algorithm::ksvd: {
      KsvdResult res = denoise_ksvd_full(noisy, ksvd_params_from_json(params, a.sigma));
      if (!a.dump_dictionary.empty()) save_dictionary(res.dictionary, a.dump_dictionary);
      out = std::move(res.image);
      break;
    }
    case Algorithm::noisy: break;
  }
  save_image(out, a.output);
  return 0;
}

int run_metrics(const std::string& ref, const std::string& test) {
  const MetricPair m = evaluate(clipped(load_image(ref)), clipped(load_image(test)));
  std::cout << format_cell(m.psnr, m.ssim) << '\n';
  return 0;
}

struct BenchArgs {
  std::string config;
  std::string output_dir;
  int workers = 0;
};

int run_bench(const BenchArgs& a) {
  BenchConfig config = load_bench_config(a.config);
  if (!a.output_dir.empty()) config.output_dir = a.output_dir;
  if (a.workers > 0) config.workers = a.workers;

  const fs::path out_dir = config.output_dir;
  fs::create_directories(out_dir);

  OutputSink sink;
  if (config.montages) {
    sink = [&out_dir](const TripleOutputs& t) {
      const fs::path p = out_dir / "montages" /
                         (t.dataset + "_" + t.image + "_" + std::to_string(t.size) + "_s" + sigma_tag(t.sigma) + ".png");
      emit_montage(t.clean, t.noisy, t.outputs, p);
    };
  }

  const BenchReport report = run_benchmark(config, sink);
  for (const auto& e : report.errors) std::cerr << "warning: " << e.image << ": " << e.message << '\n';

  emit_csv(report, out_dir / "results.csv");

  std::set<std::pair<std::string, int>> slices;
  std::set<std::tuple<std::string, int, std::string>> series;
  for (const auto& c : report.cells) {
    slices.insert({c.dataset, c.size});
    series.insert({c.dataset, c.size, c.image});
  }
  std::ofstream md(out_dir / "tables.md");
  for (const auto& [dataset, size] : slices) md << emit_markdown_table(report, dataset, size) << '\n';
  for (const auto& [dataset, size, image] : series) emit_plot_series(report, dataset, size, image, out_dir / "series");

  std::ofstream prov(out_dir / "provenance.json");
  prov << provenance_json(report).dump(2) << '\n';

  std::cout << report.cells.size() << " cells written to " << (out_dir / "results.csv").string() << '\n';
  return 0;
}

struct MontageArgs {
  std::string clean, noisy, nlm, ksvd, bm3d, output;
};

int run_montage(const MontageArgs& a) {
  const Image clean = load_image(a.clean);
  const Image noisy = load_image(a.noisy);
  std::map<Algorithm, Image> outputs;
  if (!a.nlm.empty()) outputs.emplace(Algorithm::nlmeans, load_image(a.nlm));
  if (!a.ksvd.empty()) outputs.emplace(Algorithm::ksvd, load_image(a.ksvd));
  if (!a.bm3d.empty()) outputs.emplace(Algorithm::bm3d, load_image(a.bm3d));
  emit_montage(clean, noisy, outputs, a.output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grayscale denoising toolkit: AWGN corruption, NL-means, K-SVD, BM3D, PSNR/SSIM."};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  CorruptArgs corrupt_args;
  auto* corrupt_cmd = app.add_subcommand("corrupt", "Add synthetic noise to an image");
  corrupt_cmd->add_option("input", corrupt_args.input, "Clean image (PGM or PNG)")->required();
  corrupt_cmd->add_option("--noise", corrupt_args.family, "Noise family")
      ->check(CLI::IsMember({"awgn", "salt_pepper", "speckle"}));
  corrupt_cmd->add_option("--sigma", corrupt_args.sigma, "AWGN standard deviation (intensity units)");
  corrupt_cmd->add_option("--density", corrupt_args.density, "Salt-and-pepper density");
  corrupt_cmd->add_option("--variance", corrupt_args.variance, "Speckle variance");
  corrupt_cmd->add_option("--seed", corrupt_args.seed, "RNG seed");
  corrupt_cmd->add_option("-o,--output", corrupt_args.output, "Output path")->required();

  DenoiseArgs denoise_args;
  auto* denoise_cmd = app.add_subcommand("denoise", "Denoise an image");
  denoise_cmd->add_option("input", denoise_args.input, "Noisy image")->required();
  denoise_cmd->add_option("--algo", denoise_args.algo, "Algorithm")
      ->required()
      ->check(CLI::IsMember({"nlm", "nlmeans", "ksvd", "bm3d"}));
  denoise_cmd->add_option("--sigma", denoise_args.sigma, "Noise standard deviation")->required();
  denoise_cmd->add_option("--params", denoise_args.params_file, "JSON file with parameter overrides");
  denoise_cmd->add_option("--param", denoise_args.overrides, "Parameter override key=value (repeatable)");
  denoise_cmd->add_option("--dump-dictionary", denoise_args.dump_dictionary, "Write the learned K-SVD dictionary");
  denoise_cmd->add_option("-o,--output", denoise_args.output, "Output path")->required();

  std::string metrics_ref, metrics_test;
  auto* metrics_cmd = app.add_subcommand("metrics", "Print PSNR/SSIM of test against ref");
  metrics_cmd->add_option("ref", metrics_ref, "Reference image")->required();
  metrics_cmd->add_option("test", metrics_test, "Test image")->required();

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "Run the benchmark matrix from a JSON config");
  bench_cmd->add_option("--config", bench_args.config, "Bench config JSON")->required();
  bench_cmd->add_option("--output-dir", bench_args.output_dir, "Override output_dir");
  bench_cmd->add_option("--workers", bench_args.workers, "Worker threads");

  MontageArgs montage_args;
  auto* montage_cmd = app.add_subcommand("montage", "Compose clean | noisy | outputs side by side");
  montage_cmd->add_option("clean", montage_args.clean, "Clean image")->required();
  montage_cmd->add_option("noisy", montage_args.noisy, "Noisy image")->required();
  montage_cmd->add_option("--nlm", montage_args.nlm, "NL-means output");
  montage_cmd->add_option("--ksvd", montage_args.ksvd, "K-SVD output");
  montage_cmd->add_option("--bm3d", montage_args.bm3d, "BM3D output");
  montage_cmd->add_option("-o,--output", montage_args.output, "Output PNG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*corrupt_cmd) return run_corrupt(corrupt_args);
    if (*denoise_cmd) return run_denoise(denoise_args);
    if (*metrics_cmd) return run_metrics(metrics_ref, metrics_test);
    if (*bench_cmd) return run_bench(bench_args);
    if (*montage_cmd) return run_montage(montage_args);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}
