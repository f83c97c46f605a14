#include "denoise/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "denoise/error.hpp"
#include "denoise/image_io.hpp"

namespace denoise {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int decimals) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string format_sigma(double sigma) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", sigma);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

bool cell_less(const BenchCell& a, const BenchCell& b) {
  return std::tie(a.dataset, a.image, a.size, a.sigma, a.algorithm) <
         std::tie(b.dataset, b.image, b.size, b.sigma, b.algorithm);
}

nlohmann::json metric_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

std::string format_psnr(double psnr) { return fixed(psnr, 2); }

std::string format_cell(double psnr, double ssim) { return fixed(psnr, 2) + "/" + fixed(ssim, 2); }

std::vector<BenchCell> sorted_cells(const BenchReport& report) {
  std::vector<BenchCell> cells = report.cells;
  std::stable_sort(cells.begin(), cells.end(), cell_less);
  return cells;
}

std::string format_csv(const BenchReport& report) {
  std::ostringstream out;
  out << "dataset,image,size,sigma,algorithm,psnr_db,ssim,wall_ms\n";
  for (const BenchCell& c : sorted_cells(report)) {
    out << c.dataset << ',' << c.image << ',' << c.size << ',' << format_sigma(c.sigma) << ','
        << to_string(c.algorithm) << ',' << fixed(c.psnr, 2) << ',' << fixed(c.ssim, 2) << ','
        << fixed(c.wall_ms, 1) << '\n';
  }
  return out.str();
}

void emit_csv(const BenchReport& report, const fs::path& path) { write_text(path, format_csv(report)); }

std::string emit_markdown_table(const BenchReport& report, const std::string& dataset, int size) {
  std::set<std::string> image_set;
  std::set<double> sigma_set;
  std::map<std::tuple<double, Algorithm, std::string>, const BenchCell*> lookup;
  for (const BenchCell& c : report.cells) {
    if (c.dataset != dataset || c.size != size) continue;
    image_set.insert(c.image);
    sigma_set.insert(c.sigma);
    lookup[{c.sigma, c.algorithm, c.image}] = &c;
  }

  std::ostringstream out;
  out << "### " << dataset << " " << size << "x" << size << "\n\n";
  if (image_set.empty()) {
    out << "_No results for this dataset and size._\n";
    return out.str();
  }
  out << "| Noise | Algorithm |";
  for (const auto& img : image_set) out << ' ' << img << " |";
  out << "\n|---|---|";
  for (std::size_t i = 0; i < image_set.size(); ++i) out << "---|";
  out << '\n';

  for (double sigma : sigma_set) {
    bool first = true;
    for (Algorithm algo : {Algorithm::noisy, Algorithm::nlmeans, Algorithm::ksvd, Algorithm::bm3d}) {
      out << "| " << (first ? format_sigma(sigma) : "") << " | " << display_name(algo) << " |";
      for (const auto& img : image_set) {
        const auto it = lookup.find({sigma, algo, img});
        out << ' ' << (it == lookup.end() ? "-" : format_cell(it->second->psnr, it->second->ssim)) << " |";
      }
      out << '\n';
      first = false;
    }
  }
  return out.str();
}

SeriesFiles emit_plot_series(const BenchReport& report, const std::string& dataset, int size,
                             const std::string& image, const fs::path& dir) {
  std::set<double> sigmas;
  std::set<Algorithm> algos;
  std::map<std::pair<double, Algorithm>, const BenchCell*> lookup;
  for (const BenchCell& c : report.cells) {
    if (c.dataset != dataset || c.size != size || c.image != image) continue;
    sigmas.insert(c.sigma);
    algos.insert(c.algorithm);
    lookup[{c.sigma, c.algorithm}] = &c;
  }
  if (sigmas.empty()) {
    throw ConfigError("no results for " + dataset + "/" + image + " at " + std::to_string(size));
  }

  std::ostringstream psnr_out;
  std::ostringstream ssim_out;
  psnr_out << "sigma";
  ssim_out << "sigma";
  for (Algorithm a : algos) {
    psnr_out << '\t' << to_string(a);
    ssim_out << '\t' << to_string(a);
  }
  psnr_out << '\n';
  ssim_out << '\n';
  for (double sigma : sigmas) {
    psnr_out << format_sigma(sigma);
    ssim_out << format_sigma(sigma);
    for (Algorithm a : algos) {
      const auto it = lookup.find({sigma, a});
      psnr_out << '\t' << (it == lookup.end() ? "nan" : fixed(it->second->psnr, 4));
      ssim_out << '\t' << (it == lookup.end() ? "nan" : fixed(it->second->ssim, 4));
    }
    psnr_out << '\n';
    ssim_out << '\n';
  }

  const std::string stem = dataset + "_" + std::to_string(size) + "_" + image;
  SeriesFiles files{dir / (stem + "_psnr.tsv"), dir / (stem + "_ssim.tsv")};
  write_text(files.psnr, psnr_out.str());
  write_text(files.ssim, ssim_out.str());
  return files;
}

Image compose_montage(const std::vector<MontagePanel>& panels) {
  if (panels.empty()) throw SizeError("montage needs at least one panel");
  const Image& first = *panels.front().image;
  for (const auto& p : panels) {
    if (!p.image->same_shape(first)) throw SizeError("montage panels differ in size");
  }
  const int n = static_cast<int>(panels.size());
  const int width = n * first.width() + (n - 1) * kMontageSeparator;
  Image out(width, first.height(), 255.0);
  for (int i = 0; i < n; ++i) {
    const int x0 = i * (first.width() + kMontageSeparator);
    const Image& img = *panels[i].image;
    for (int r = 0; r < img.height(); ++r)
      for (int c = 0; c < img.width(); ++c) out(r, x0 + c) = std::clamp(img(r, c), 0.0, 255.0);
  }
  return out;
}

void emit_montage(const Image& clean, const Image& noisy, const std::map<Algorithm, Image>& outputs,
                  const fs::path& path) {
  std::vector<MontagePanel> panels{{"Clean", &clean}, {"Noisy", &noisy}};
  for (Algorithm a : {Algorithm::nlmeans, Algorithm::ksvd, Algorithm::bm3d}) {
    if (const auto it = outputs.find(a); it != outputs.end()) {
      panels.push_back({std::string(display_name(a)), &it->second});
    }
  }
  const Image montage = compose_montage(panels);

  const Image reference = clipped(clean);
  nlohmann::json captions = nlohmann::json::array();
  for (const auto& p : panels) {
    const MetricPair m = evaluate(reference, clipped(*p.image));
    captions.push_back({{"label", p.label},
                        {"psnr", metric_json(m.psnr)},
                        {"ssim", m.ssim},
                        {"caption", format_cell(m.psnr, m.ssim)}});
  }

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  save_image(montage, path);
  fs::path sidecar = path;
  sidecar.replace_extension(".json");
  write_text(sidecar, nlohmann::json{{"panel_width", clean.width()},
                                     {"separator", kMontageSeparator},
                                     {"panels", captions}}
                          .dump(2) + "\n");
}

nlohmann::json provenance_json(const BenchReport& report) {
  nlohmann::json errors = nlohmann::json::array();
  for (const auto& e : report.errors) errors.push_back({{"image", e.image}, {"message", e.message}});
  return {{"config_hash", report.provenance.config_hash},
          {"seed", report.provenance.seed},
          {"tool_version", report.provenance.tool_version},
          {"cells", report.cells.size()},
          {"errors", errors}};
}

}  // namespace denoise
