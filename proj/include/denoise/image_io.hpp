#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "denoise/image.hpp"

namespace denoise {

// Reads binary PGM (P5, maxval 255) or 8-bit PNG. Colour PNGs are reduced to
// Rec. 601 luma; alpha is discarded.
Image load_image(const std::filesystem::path& path);

// Writes binary PGM or 8-bit grayscale PNG, chosen by extension (.pgm/.png).
// Values are rounded half away from zero and clipped to [0, 255].
void save_image(const Image& img, const std::filesystem::path& path);

std::uint8_t quantize(double value);

enum class DatasetKind { standard, natural, texture, synthetic };

std::string_view to_string(DatasetKind kind);
DatasetKind parse_dataset_kind(std::string_view name);

struct ManifestEntry {
  std::string name;
  std::filesystem::path path;  // resolved relative to the manifest file
  DatasetKind dataset;
};

// JSON manifest: either a top-level array or {"images": [...]}, each element
// {"name", "path", "dataset"}. Relative paths resolve against the manifest's
// directory.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

}  // namespace denoise
