#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "denoise/error.hpp"
#include "denoise/image.hpp"
#include "denoise/image_io.hpp"
#include "denoise/patches.hpp"

using namespace denoise;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "denoise_unit";
  fs::create_directories(dir);
  return dir / name;
}

Image random_integer_image(int w, int h, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_int_distribution<int> dist(0, 255);
  Image img(w, h);
  for (double& v : img.pixels()) v = dist(gen);
  return img;
}

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

}  // namespace

TEST_CASE("image construction rejects bad shapes") {
  CHECK_THROWS_AS(Image(0, 4), SizeError);
  CHECK_THROWS_AS(Image(3, 3, std::vector<double>(8)), SizeError);
  Image img(3, 2, 7.0);
  CHECK(img.size() == 6);
  CHECK(img(1, 2) == 7.0);
}

TEST_CASE("PGM decode of a 2x2 file") {
  const fs::path p = temp_path("tiny.pgm");
  write_bytes(p, std::string("P5\n2 2\n255\n") + std::string("\x00\xff\x80\x40", 4));
  const Image img = load_image(p);
  REQUIRE(img.width() == 2);
  REQUIRE(img.height() == 2);
  CHECK(img(0, 0) == 0.0);
  CHECK(img(0, 1) == 255.0);
  CHECK(img(1, 0) == 128.0);
  CHECK(img(1, 1) == 64.0);
}

TEST_CASE("PGM with 16-bit maxval is a format error") {
  const fs::path p = temp_path("deep.pgm");
  write_bytes(p, std::string("P5\n1 1\n65535\n") + std::string("\x00\x01", 2));
  try {
    load_image(p);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("bit depth") != std::string::npos);
  }
}

TEST_CASE("missing file is an I/O error") {
  CHECK_THROWS_AS(load_image(temp_path("does_not_exist.png")), IoError);
}

TEST_CASE("luma of pure red") { CHECK(luma601(255, 0, 0) == doctest::Approx(76.245).epsilon(1e-12)); }

TEST_CASE("save clips and rounds") {
  CHECK(quantize(255.7) == 255);
  CHECK(quantize(-3.2) == 0);
  CHECK(quantize(2.5) == 3);
  CHECK(quantize(127.49) == 127);
}

TEST_CASE("save/load round trip is identity on integer images") {
  const Image img = random_integer_image(37, 23, 5);
  for (const char* ext : {".pgm", ".png"}) {
    const fs::path p = temp_path(std::string("round") + ext);
    save_image(img, p);
    CHECK(load_image(p) == img);
  }
}

TEST_CASE("resize 512 to 256 is 2x2 block means") {
  const Image img = random_integer_image(512, 512, 11);
  const Image out = resize_to(img, 256);
  REQUIRE(out.width() == 256);
  for (int r = 0; r < 256; r += 17)
    for (int c = 0; c < 256; c += 13) {
      const double mean = (img(2 * r, 2 * c) + img(2 * r, 2 * c + 1) + img(2 * r + 1, 2 * c) + img(2 * r + 1, 2 * c + 1)) / 4.0;
      CHECK(out(r, c) == doctest::Approx(mean).epsilon(1e-12));
    }
}

TEST_CASE("resize 256 to 64 matches independent 4x4 means") {
  const Image img = random_integer_image(256, 256, 3);
  const Image out = resize_to(img, 64);
  double worst = 0.0;
  for (int r = 0; r < 64; ++r)
    for (int c = 0; c < 64; ++c) {
      double s = 0.0;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) s += img(4 * r + i, 4 * c + j);
      worst = std::max(worst, std::abs(out(r, c) - s / 16.0));
    }
  CHECK(worst < 1e-9);
}

TEST_CASE("resize constants and crops") {
  const Image flat(4, 4, 100.0);
  const Image half = resize_to(flat, 2);
  for (double v : half.pixels()) CHECK(v == doctest::Approx(100.0).epsilon(1e-12));

  const Image wide(300, 200, 42.0);
  const Image sq = resize_to(wide, 128);
  CHECK(sq.width() == 128);
  CHECK(sq.height() == 128);
  for (double v : sq.pixels()) CHECK(v == doctest::Approx(42.0).epsilon(1e-12));

  CHECK(center_crop_square(Image(10, 6)).width() == 6);
  CHECK_THROWS_AS(resize_to(Image(50, 50), 64), SizeError);
}

TEST_CASE("axis origins snap the last patch") {
  CHECK(axis_origins(8, 8, 8) == std::vector<int>{0});
  CHECK(axis_origins(10, 8, 4) == std::vector<int>{0, 2});
  CHECK(axis_origins(20, 8, 5) == std::vector<int>{0, 5, 10, 12});
}

TEST_CASE("extract_patches counts and order") {
  CHECK(extract_patches(Image(8, 8), 8, 8).count() == 1);

  const PatchSet ps = extract_patches(random_integer_image(10, 10, 1), 8, 4);
  REQUIRE(ps.count() == 4);
  CHECK(ps.origins[0] == PatchOrigin{0, 0});
  CHECK(ps.origins[1] == PatchOrigin{0, 2});
  CHECK(ps.origins[2] == PatchOrigin{2, 0});
  CHECK(ps.origins[3] == PatchOrigin{2, 2});

  const Image img = random_integer_image(64, 64, 2);
  const PatchSet dense = extract_patches(img, 8, 1);
  CHECK(dense.count() == 3249);
  CHECK(dense == extract_patches(img, 8, 1));
  const auto p = dense.patch(100);
  const PatchOrigin o = dense.origins[100];
  CHECK(p[9] == img(o.row + 1, o.col + 1));
}

TEST_CASE("aggregation oracles") {
  SUBCASE("single patch copies verbatim") {
    const Image img = random_integer_image(8, 8, 4);
    const PatchSet ps = extract_patches(img, 8, 8);
    const std::vector<double> w{1.0};
    CHECK(aggregate_patches(ps, w, 8, 8) == img);
  }
  SUBCASE("weighted overlap is 7.5") {
    PatchSet ps;
    ps.patch_size = 2;
    ps.stride = 1;
    ps.origins = {{0, 0}, {0, 1}};
    ps.values = {0, 0, 0, 0, 10, 10, 10, 10};
    const std::vector<double> w{1.0, 3.0};
    const Image out = aggregate_patches(ps, w, 3, 2);
    CHECK(out(0, 0) == 0.0);
    CHECK(out(0, 1) == doctest::Approx(7.5));
    CHECK(out(1, 1) == doctest::Approx(7.5));
    CHECK(out(0, 2) == 10.0);
  }
  SUBCASE("uncovered pixel") {
    PatchSet ps;
    ps.patch_size = 2;
    ps.origins = {{0, 0}};
    ps.values = {1, 1, 1, 1};
    const std::vector<double> w{1.0};
    CHECK_THROWS_AS(aggregate_patches(ps, w, 3, 2), CoverageError);
  }
}

TEST_CASE("extract then aggregate reproduces the image") {
  const Image img = random_integer_image(41, 29, 9);
  for (int stride : {1, 2, 3, 5, 8}) {
    const PatchSet ps = extract_patches(img, 8, stride);
    const std::vector<double> w(ps.count(), 1.0);
    CHECK(aggregate_patches(ps, w, img.width(), img.height()) == img);
  }
  Image real(33, 33);
  std::mt19937 gen(1);
  std::normal_distribution<double> nd(100.0, 40.0);
  for (double& v : real.pixels()) v = nd(gen);
  const PatchSet ps = extract_patches(real, 7, 3);
  const Image back = aggregate_patches(ps, std::vector<double>(ps.count(), 1.0), 33, 33);
  for (std::size_t i = 0; i < real.size(); ++i) CHECK(std::abs(back.pixels()[i] - real.pixels()[i]) < 1e-12);
}

TEST_CASE("manifest loading") {
  const fs::path dir = temp_path("manifest_case");
  fs::create_directories(dir);
  write_bytes(dir / "m.json", R"({"images":[{"name":"a","path":"a.pgm","dataset":"synthetic"},
                                            {"name":"b","path":"/abs/b.png","dataset":"standard"}]})");
  const auto entries = load_manifest(dir / "m.json");
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].path == dir / "a.pgm");
  CHECK(entries[1].path == fs::path("/abs/b.png"));
  CHECK(entries[1].dataset == DatasetKind::standard);

  write_bytes(dir / "dup.json", R"([{"name":"a","path":"a.pgm","dataset":"synthetic"},
                                    {"name":"a","path":"b.pgm","dataset":"synthetic"}])");
  CHECK_THROWS_AS(load_manifest(dir / "dup.json"), ConfigError);
  write_bytes(dir / "bad.json", R"([{"name":"a","path":"a.pgm","dataset":"paintings"}])");
  CHECK_THROWS_AS(load_manifest(dir / "bad.json"), ConfigError);
}

#ifdef DENOISE_DATA_DIR
TEST_CASE("bundled RGB image loads as luma") {
  const fs::path p = fs::path(DENOISE_DATA_DIR) / "standard" / "mandrill.png";
  if (!fs::exists(p)) return;
  const Image img = load_image(p);
  CHECK(img.width() == 512);
  CHECK(img.height() == 512);
}
#endif
