// Acceptance suite: one PASS/FAIL line per criterion, details indented above it.
#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "denoise/bench.hpp"
#include "denoise/bm3d.hpp"
#include "denoise/image_io.hpp"
#include "denoise/ksvd.hpp"
#include "denoise/metrics.hpp"
#include "denoise/nlm.hpp"
#include "denoise/noise.hpp"
#include "denoise/report.hpp"
#include "denoise/sparse.hpp"

using namespace denoise;
namespace fs = std::filesystem;

namespace {

const fs::path kData = DENOISE_DATA_DIR;

struct Outcome {
  bool pass = true;
  void require(bool ok) { pass = pass && ok; }
};

void detail(const char* fmt, auto... args) {
  std::printf("    ");
  std::printf(fmt, args...);
  std::printf("\n");
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::map<std::string, fs::path> standard_paths() {
  std::map<std::string, fs::path> out;
  for (const auto& e : load_manifest(kData / "manifest.json")) {
    if (e.dataset == DatasetKind::standard) out[e.name] = e.path;
  }
  return out;
}

std::optional<Image> standard_image(const std::string& name, int size) {
  static const auto paths = standard_paths();
  const auto it = paths.find(name);
  if (it == paths.end() || !fs::exists(it->second)) {
    detail("%s: image file not available", name.c_str());
    return std::nullopt;
  }
  return resize_to(load_image(it->second), size);
}

Image noisy_copy(const Image& clean, const std::string& name, int size, double sigma) {
  return awgn(clean, NoiseSpec::awgn(sigma, cell_seed(0, name, size, sigma)));
}

double scored_psnr(const Image& clean, const Image& out) { return psnr(clipped(clean), clipped(out)); }

bool within(double value, double target, double tol) { return std::abs(value - target) <= tol; }

// 1 -------------------------------------------------------------------------
Outcome noisy_baseline() {
  Outcome o;
  const auto clean = standard_image("cameraman", 256);
  if (!clean) return {false};
  for (double sigma : {5.0, 20.0, 35.0, 50.0, 65.0, 80.0, 95.0}) {
    double sum = 0.0;
    const int seeds = 10;
    for (int s = 0; s < seeds; ++s) sum += psnr(*clean, awgn(*clean, NoiseSpec::awgn(sigma, 1000 + s)));
    const double mean = sum / seeds;
    const double expected = 20.0 * std::log10(255.0 / sigma);
    const bool ok = within(mean, expected, 0.3);
    detail("sigma=%-3g mean noisy PSNR %.3f dB, expected %.3f (+-0.3) %s", sigma, mean, expected, ok ? "ok" : "OUT");
    o.require(ok);
  }
  return o;
}

// 2 -------------------------------------------------------------------------
Outcome bm3d_reproduction() {
  Outcome o;
  const std::map<std::string, std::vector<double>> table{
      {"cameraman", {30.48, 27.91, 26.14, 24.88, 24.08, 23.28}},
      {"lena", {30.44, 27.94, 26.27, 25.28, 24.56, 23.52}},
      {"house", {33.87, 31.51, 29.80, 28.67, 27.27, 25.73}},
  };
  const std::vector<double> sigmas{20, 35, 50, 65, 80, 95};
  for (const auto& [name, targets] : table) {
    const auto clean = standard_image(name, 256);
    if (!clean) {
      o.require(false);
      continue;
    }
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
      const double sigma = sigmas[i];
      const Image noisy = noisy_copy(*clean, name, 256, sigma);
      const auto t0 = std::chrono::steady_clock::now();
      const Image out = denoise_bm3d(noisy, Bm3dParams::for_sigma(sigma));
      const double secs = seconds_since(t0);
      const double p = scored_psnr(*clean, out);
      const double tol = sigma >= 65 ? 1.5 : 1.0;
      const bool ok = within(p, targets[i], tol) && secs <= 60.0;
      detail("%-9s sigma=%-3g BM3D %.2f dB, table %.2f (+-%.1f), %.1f s %s", name.c_str(), sigma, p, targets[i],
             tol, secs, ok ? "ok" : "OUT");
      o.require(ok);
    }
  }
  return o;
}

// 3 -------------------------------------------------------------------------
Outcome ksvd_reproduction() {
  Outcome o;
  struct Case {
    std::string name;
    int size;
    double sigma, target;
  };
  for (const Case& c : {Case{"cameraman", 256, 20, 30.03}, Case{"house", 64, 5, 37.97}}) {
    const auto clean = standard_image(c.name, c.size);
    if (!clean) {
      o.require(false);
      continue;
    }
    const Image noisy = noisy_copy(*clean, c.name, c.size, c.sigma);
    const auto t0 = std::chrono::steady_clock::now();
    const Image out = denoise_ksvd(noisy, KsvdParams::for_sigma(c.sigma));
    const double secs = seconds_since(t0);
    const double p = scored_psnr(*clean, out);
    const bool ok = within(p, c.target, 1.0) && secs <= 120.0;
    detail("%s %dx%d sigma=%g K-SVD %.2f dB, table %.2f (+-1.0), %.1f s %s", c.name.c_str(), c.size, c.size, c.sigma,
           p, c.target, secs, ok ? "ok" : "OUT");
    o.require(ok);
  }
  return o;
}

// 4 -------------------------------------------------------------------------
Outcome nlm_reproduction() {
  Outcome o;
  const auto clean = standard_image("cameraman", 64);
  if (!clean) return {false};
  const Image noisy = noisy_copy(*clean, "cameraman", 64, 20);
  const NlmParams params = NlmParams::for_sigma(20);
  const Image out = denoise_nlm(noisy, params);
  const double p = scored_psnr(*clean, out);
  const bool band = within(p, 27.51, 1.5);
  detail("cameraman 64x64 sigma=20 NL-means %.2f dB, table 27.51 (+-1.5) %s", p, band ? "ok" : "OUT");
  o.require(band);

  long violations = 0;
  const int sr = params.search_radius;
  for (int r = 0; r < noisy.height(); ++r)
    for (int c = 0; c < noisy.width(); ++c) {
      double lo = INFINITY, hi = -INFINITY;
      for (int dr = -sr; dr <= sr; ++dr)
        for (int dc = -sr; dc <= sr; ++dc) {
          const double v = noisy(reflect_index(r + dr, noisy.height()), reflect_index(c + dc, noisy.width()));
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      violations += (out(r, c) < lo - 1e-9 || out(r, c) > hi + 1e-9);
    }
  detail("convex-combination check over %zu pixels: %ld violations", noisy.size(), violations);
  o.require(violations == 0);
  return o;
}

// 5 -------------------------------------------------------------------------
Outcome ordering() {
  Outcome o;
  const std::vector<std::string> names{"cameraman", "house", "peppers", "lena", "barbara",
                                       "boat",      "man",   "livingroom", "mandrill"};
  for (double sigma : {20.0, 35.0}) {
    std::map<Algorithm, double> sum;
    int used = 0;
    for (const auto& name : names) {
      const auto clean = standard_image(name, 256);
      if (!clean) continue;
      ++used;
      const Image noisy = noisy_copy(*clean, name, 256, sigma);
      sum[Algorithm::nlmeans] += scored_psnr(*clean, denoise_nlm(noisy, NlmParams::for_sigma(sigma)));
      sum[Algorithm::ksvd] += scored_psnr(*clean, denoise_ksvd(noisy, KsvdParams::for_sigma(sigma)));
      sum[Algorithm::bm3d] += scored_psnr(*clean, denoise_bm3d(noisy, Bm3dParams::for_sigma(sigma)));
    }
    if (used == 0) return {false};
    const double nlm = sum[Algorithm::nlmeans] / used;
    const double ksvd = sum[Algorithm::ksvd] / used;
    const double bm3d = sum[Algorithm::bm3d] / used;
    const bool ranked = bm3d >= ksvd && ksvd >= nlm;
    detail("sigma=%g over %d/%zu images: BM3D %.2f, K-SVD %.2f, NL-means %.2f %s", sigma, used, names.size(), bm3d,
           ksvd, nlm, ranked ? "ranked" : "NOT ranked");
    o.require(ranked);
    if (used != static_cast<int>(names.size())) {
      detail("incomplete: the criterion is defined over all %zu standard images", names.size());
      o.require(false);
    }
  }
  return o;
}

// 6 -------------------------------------------------------------------------
Outcome monotonicity() {
  Outcome o;
  BenchConfig config;
  config.manifest_path = kData / "manifest.json";
  config.datasets = {"standard"};
  config.images = {"cameraman", "lena"};
  config.sizes = {64};
  config.record_wall_time = false;
  const BenchReport report = run_benchmark(config);
  std::map<std::tuple<std::string, int, Algorithm>, std::vector<std::pair<double, double>>> rows;
  for (const auto& c : report.cells) rows[{c.image, c.size, c.algorithm}].push_back({c.sigma, c.psnr});
  for (auto& [key, row] : rows) {
    std::sort(row.begin(), row.end());
    const bool noisy = std::get<2>(key) == Algorithm::noisy;
    bool ok = row.size() == config.sigmas.size();
    double worst_rise = -INFINITY;
    for (std::size_t i = 1; i < row.size(); ++i) {
      const double rise = row[i].second - row[i - 1].second;
      worst_rise = std::max(worst_rise, rise);
      ok = ok && (noisy ? rise < 0.0 : rise <= 0.2);
    }
    detail("%-9s %dx%d %-8s %zu sigmas, largest step %+.3f dB %s", std::get<0>(key).c_str(), std::get<1>(key),
           std::get<1>(key), std::string(to_string(std::get<2>(key))).c_str(), row.size(), worst_rise,
           ok ? "ok" : "OUT");
    o.require(ok);
  }
  o.require(!rows.empty());
  return o;
}

// 7 -------------------------------------------------------------------------
Outcome oracle_equivalence() {
  Outcome o;
  std::mt19937 gen(7);

  // block matching vs exhaustive scan
  int bm_mismatch = 0;
  const Bm3dParams params = Bm3dParams::for_sigma(20);
  for (int t = 0; t < 50; ++t) {
    Image img(64, 64);
    std::uniform_int_distribution<int> coarse(0, 5), fine(-5, 5);
    std::vector<int> levels(81);
    for (int& v : levels) v = 40 * coarse(gen);
    for (int r = 0; r < 64; ++r)
      for (int c = 0; c < 64; ++c) img(r, c) = levels[(r / 8) * 9 + c / 8] + fine(gen);
    const PatchOrigin ref{static_cast<int>(gen() % 57), static_cast<int>(gen() % 57)};
    for (double tau : {25.0, 400.0, params.match_threshold}) {
      std::vector<std::pair<double, PatchOrigin>> all;
      for (int r = 0; r + 8 <= 64; ++r)
        for (int c = 0; c + 8 <= 64; ++c) {
          if (std::abs(r - ref.row) > params.search_radius || std::abs(c - ref.col) > params.search_radius) continue;
          double s = 0.0;
          for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) s += std::pow(img(ref.row + i, ref.col + j) - img(r + i, c + j), 2);
          if (s / 64.0 <= tau) all.push_back({s / 64.0, {r, c}});
        }
      std::stable_sort(all.begin(), all.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        if ((a.second == ref) != (b.second == ref)) return a.second == ref;
        return std::make_pair(a.second.row, a.second.col) < std::make_pair(b.second.row, b.second.col);
      });
      const std::size_t keep = std::bit_floor(std::min<std::size_t>(all.size(), params.max_group));
      std::vector<PatchOrigin> expected;
      for (std::size_t i = 0; i < keep; ++i) expected.push_back(all[i].second);
      bm_mismatch += block_match(img, ref, params, tau).coords != expected;
    }
  }
  detail("block_match vs exhaustive: %d mismatches over 50 images x 3 thresholds", bm_mismatch);
  o.require(bm_mismatch == 0);

  // OMP vs best-k subset
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> coef(0.5, 2.0);
  int omp_worse = 0;
  double worst_gap = 0.0;
  for (int t = 0; t < 100; ++t) {
    Eigen::MatrixXd m(8, 5);
    for (int c = 0; c < 5; ++c)
      for (int r = 0; r < 8; ++r) m(r, c) = nd(gen);
    Dictionary d(m);
    d.normalize();
    const int k = 1 + t % 2;
    std::vector<int> idx{0, 1, 2, 3, 4};
    std::shuffle(idx.begin(), idx.end(), gen);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(8);
    for (int i = 0; i < k; ++i) y += (gen() % 2 ? 1.0 : -1.0) * coef(gen) * d.atom(idx[i]);
    const SparseCode code = omp(d, std::span<const double>(y.data(), 8), 0.0, k);
    double best = y.norm();
    for (int i = 0; i < 5; ++i)
      for (int j = i; j < 5; ++j) {
        if (k == 1 && j != i) continue;
        Eigen::MatrixXd s(8, i == j ? 1 : 2);
        s.col(0) = d.atom(i);
        if (i != j) s.col(1) = d.atom(j);
        best = std::min(best, (y - s * s.colPivHouseholderQr().solve(y)).norm());
      }
    if (code.residual_norm > best + 1e-9) {
      ++omp_worse;
      worst_gap = std::max(worst_gap, code.residual_norm - best);
    }
  }
  detail("OMP vs exhaustive best-k: %d/100 instances above the optimum (largest gap %.3g)", omp_worse, worst_gap);
  o.require(omp_worse == 0);

  // 3D transform
  double worst_rt = 0.0, worst_parseval = 0.0;
  std::normal_distribution<double> px(128.0, 60.0);
  for (int count : {1, 2, 4, 8, 16}) {
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> stack(static_cast<std::size_t>(count) * 64);
      for (double& v : stack) v = px(gen);
      std::vector<double> coeffs = stack;
      transform_3d(coeffs, 8, count);
      double e_in = 0.0, e_out = 0.0;
      for (std::size_t i = 0; i < stack.size(); ++i) {
        e_in += stack[i] * stack[i];
        e_out += coeffs[i] * coeffs[i];
      }
      worst_parseval = std::max(worst_parseval, std::abs(e_in - e_out) / e_in);
      inverse_transform_3d(coeffs, 8, count);
      for (std::size_t i = 0; i < stack.size(); ++i) worst_rt = std::max(worst_rt, std::abs(coeffs[i] - stack[i]));
    }
  }
  detail("3D transform: max round-trip error %.2e, max relative Parseval error %.2e", worst_rt, worst_parseval);
  o.require(worst_rt <= 1e-9 && worst_parseval <= 1e-9);
  return o;
}

// 8 -------------------------------------------------------------------------
Outcome ksvd_monotone() {
  Outcome o;
  std::mt19937 gen(20);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd signals(16, 20), init(16, 8);
  for (Eigen::Index c = 0; c < 20; ++c)
    for (Eigen::Index r = 0; r < 16; ++r) signals(r, c) = nd(gen);
  for (Eigen::Index c = 0; c < 8; ++c)
    for (Eigen::Index r = 0; r < 16; ++r) init(r, c) = nd(gen);
  Dictionary d(init);
  d.normalize();
  KsvdTrainer trainer(signals, d);
  int updates = 0, rises = 0;
  for (int it = 0; it < 10; ++it) {
    trainer.sparse_code(0.0, 3);
    double prev = trainer.representation_error();
    for (int k = 0; k < 8; ++k) {
      trainer.update_atom(k);
      const double now = trainer.representation_error();
      rises += now > prev + 1e-9;
      ++updates;
      prev = now;
    }
  }
  detail("20 patches, 8 atoms, 10 sweeps: %d of %d atom updates raised the error", rises, updates);
  o.require(rises == 0);
  return o;
}

// 9 -------------------------------------------------------------------------
Outcome determinism() {
  Outcome o;
  BenchConfig config;
  config.manifest_path = kData / "manifest.json";
  config.datasets = {"standard", "synthetic"};
  config.images = {"cameraman", "boat", "checker", "rings"};
  config.sizes = {64};
  config.sigmas = {5, 35, 80};
  config.seed = 31337;
  config.record_wall_time = false;
  config.workers = 1;
  const std::string a = format_csv(run_benchmark(config));
  config.workers = 4;
  const std::string b = format_csv(run_benchmark(config));
  const auto lines = std::count(a.begin(), a.end(), '\n');
  detail("1 worker vs 4 workers: %ld CSV lines, %s", static_cast<long>(lines), a == b ? "byte-identical" : "DIFFER");
  o.require(a == b && lines > 1);
  return o;
}

// 10 ------------------------------------------------------------------------
Outcome metric_correctness() {
  Outcome o;
  const double p = psnr(Image(16, 16, 16.0), Image(16, 16, 0.0));
  const double s = ssim(Image(32, 32, 100.0), Image(32, 32, 150.0));
  std::mt19937 gen(10);
  std::uniform_real_distribution<double> u(0, 255);
  double self_gap = 0.0, sym_gap = 0.0;
  for (int t = 0; t < 20; ++t) {
    Image a(48, 40), b(48, 40);
    for (double& v : a.pixels()) v = u(gen);
    for (std::size_t i = 0; i < a.size(); ++i) b.pixels()[i] = std::clamp(a.pixels()[i] + u(gen) / 4 - 32, 0.0, 255.0);
    self_gap = std::max(self_gap, std::abs(ssim(a, a) - 1.0));
    sym_gap = std::max(sym_gap, std::abs(ssim(a, b) - ssim(b, a)));
  }
  detail("psnr(mse=256) = %.4f dB (24.05)", p);
  detail("ssim(const 100, const 150) = %.6f (0.9231 +-1e-4)", s);
  detail("max |ssim(x,x) - 1| = %.2e, max |ssim(a,b) - ssim(b,a)| = %.2e", self_gap, sym_gap);
  o.require(std::abs(p - 24.05) < 0.005);
  o.require(std::abs(s - 0.9231) <= 1e-4);
  o.require(self_gap <= 1e-12);
  o.require(sym_gap <= 1e-12);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"noisy baseline PSNR matches 20*log10(255/sigma)", noisy_baseline},
      {"BM3D reproduces the 256x256 reference table", bm3d_reproduction},
      {"K-SVD reproduces the reference cells", ksvd_reproduction},
      {"NL-means band and convex-combination invariant", nlm_reproduction},
      {"mean PSNR ordering BM3D >= K-SVD >= NL-means", ordering},
      {"PSNR monotone in sigma", monotonicity},
      {"oracle equivalence (block matching, OMP, 3D transform)", oracle_equivalence},
      {"K-SVD atom updates never raise the error", ksvd_monotone},
      {"bench CSV byte-identical across runs and worker counts", determinism},
      {"closed-form metric values", metric_correctness},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      detail("exception: %s", e.what());
      out.pass = false;
    }
    failed += !out.pass;
    std::printf("%s %zu: %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
