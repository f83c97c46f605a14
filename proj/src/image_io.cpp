#include "denoise/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <nlohmann/json.hpp>
#include <set>

#include "denoise/error.hpp"

namespace denoise {

namespace fs = std::filesystem;

namespace {

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return ext;
}

// Skips whitespace and '#' comments between PGM header tokens.
void skip_pgm_separators(std::istream& in) {
  while (in) {
    const int ch = in.peek();
    if (ch == '#') {
      std::string discard;
      std::getline(in, discard);
    } else if (std::isspace(ch)) {
      in.get();
    } else {
      break;
    }
  }
}

long read_pgm_number(std::istream& in, const fs::path& path, const char* what) {
  skip_pgm_separators(in);
  long value = -1;
  if (!(in >> value)) {
    throw FormatError(path.string() + ": malformed PGM header (" + what + ")");
  }
  return value;
}

Image load_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[2] = {};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') {
    throw FormatError(path.string() + ": not a binary PGM (magic must be P5)");
  }
  const long width = read_pgm_number(in, path, "width");
  const long height = read_pgm_number(in, path, "height");
  const long maxval = read_pgm_number(in, path, "maxval");
  if (width < 1 || height < 1) throw FormatError(path.string() + ": invalid dimensions");
  if (maxval > 255) {
    throw FormatError(path.string() + ": unsupported bit depth (maxval " + std::to_string(maxval) +
                      " needs more than 8 bits)");
  }
  if (maxval != 255) {
    throw FormatError(path.string() + ": unsupported maxval " + std::to_string(maxval) +
                      " (only 255 is accepted)");
  }
  in.get();  // single whitespace byte before raster

  std::vector<unsigned char> raw(static_cast<std::size_t>(width * height));
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw FormatError(path.string() + ": truncated PGM raster");
  }
  std::vector<double> data(raw.begin(), raw.end());
  return Image(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_handler(png_structp, png_const_charp msg) { throw FormatError(msg); }
void png_warning_handler(png_structp, png_const_charp) {}

Image load_png(const fs::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler,
                                           png_warning_handler);
  if (!png) throw FormatError("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp& png;
    png_infop& info;
    ~Guard() { png_destroy_read_struct(&png, &info, nullptr); }
  } guard{png, info};

  try {
    png_init_io(png, file.get());
    png_read_info(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);
    if (bit_depth > 8) {
      throw FormatError(path.string() + ": unsupported bit depth " + std::to_string(bit_depth) +
                        " (only 8-bit PNG is accepted)");
    }
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    const int channels = png_get_channels(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    std::vector<unsigned char> buffer(rowbytes * static_cast<std::size_t>(height));
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    for (int r = 0; r < height; ++r) rows[r] = buffer.data() + rowbytes * static_cast<std::size_t>(r);
    png_read_image(png, rows.data());

    Image out(width, height);
    for (int r = 0; r < height; ++r) {
      const unsigned char* px = rows[r];
      for (int c = 0; c < width; ++c) {
        if (channels >= 3) {
          out(r, c) = luma601(px[c * channels], px[c * channels + 1], px[c * channels + 2]);
        } else {
          out(r, c) = px[c * channels];
        }
      }
    }
    return out;
  } catch (const FormatError& e) {
    const std::string what = e.what();
    if (what.rfind(path.string(), 0) == 0) throw;
    throw FormatError(path.string() + ": " + what);
  }
}

void save_pgm(const Image& img, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  std::vector<unsigned char> raw(img.size());
  std::transform(img.pixels().begin(), img.pixels().end(), raw.begin(), quantize);
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

void save_png(const Image& img, const fs::path& path) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError("cannot write " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_handler,
                                            png_warning_handler);
  if (!png) throw IoError("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp& png;
    png_infop& info;
    ~Guard() { png_destroy_write_struct(&png, &info); }
  } guard{png, info};

  std::vector<unsigned char> raw(img.size());
  std::transform(img.pixels().begin(), img.pixels().end(), raw.begin(), quantize);
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height()));
  for (int r = 0; r < img.height(); ++r) {
    rows[r] = raw.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(img.width());
  }

  try {
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
                 static_cast<png_uint_32>(img.height()), 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
  } catch (const FormatError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace

std::uint8_t quantize(double value) {
  const double rounded = std::round(value);  // half away from zero
  return static_cast<std::uint8_t>(std::clamp(rounded, 0.0, 255.0));
}

Image load_image(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("no such file: " + path.string());
  const std::string ext = lower_extension(path);
  if (ext == ".pgm") return load_pgm(path);
  if (ext == ".png") return load_png(path);

  // Fall back to sniffing the magic bytes.
  std::ifstream in(path, std::ios::binary);
  unsigned char head[8] = {};
  in.read(reinterpret_cast<char*>(head), 8);
  if (in.gcount() >= 2 && head[0] == 'P' && head[1] == '5') return load_pgm(path);
  if (in.gcount() == 8 && png_sig_cmp(head, 0, 8) == 0) return load_png(path);
  throw FormatError(path.string() + ": unrecognised image format (expected PGM P5 or PNG)");
}

void save_image(const Image& img, const fs::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".pgm") {
    save_pgm(img, path);
  } else if (ext == ".png") {
    save_png(img, path);
  } else {
    throw IoError(path.string() + ": output extension must be .pgm or .png");
  }
}

std::string_view to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::standard: return "standard";
    case DatasetKind::natural: return "natural";
    case DatasetKind::texture: return "texture";
    case DatasetKind::synthetic: return "synthetic";
  }
  return "standard";
}

DatasetKind parse_dataset_kind(std::string_view name) {
  if (name == "standard") return DatasetKind::standard;
  if (name == "natural") return DatasetKind::natural;
  if (name == "texture") return DatasetKind::texture;
  if (name == "synthetic") return DatasetKind::synthetic;
  throw ConfigError("unknown dataset kind '" + std::string(name) +
                    "' (expected standard|natural|texture|synthetic)");
}

std::vector<ManifestEntry> load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  const nlohmann::json& list = doc.is_object() ? doc.at("images") : doc;
  if (!list.is_array()) throw ConfigError(path.string() + ": manifest must list images");

  const fs::path base = path.parent_path();
  std::vector<ManifestEntry> entries;
  std::set<std::string> seen;
  for (const auto& item : list) {
    try {
      ManifestEntry entry;
      entry.name = item.at("name").get<std::string>();
      fs::path p = item.at("path").get<std::string>();
      entry.path = p.is_absolute() ? p : base / p;
      entry.dataset = parse_dataset_kind(item.at("dataset").get<std::string>());
      if (!seen.insert(std::string(to_string(entry.dataset)) + "/" + entry.name).second) {
        throw ConfigError("duplicate image '" + entry.name + "'");
      }
      entries.push_back(std::move(entry));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path.string() + ": bad manifest entry: " + e.what());
    }
  }
  return entries;
}

}  // namespace denoise
