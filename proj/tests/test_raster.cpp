#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "figlabel/error.hpp"
#include "figlabel/raster.hpp"

using namespace figlabel;

TEST_CASE("png round trip preserves pixels") {
  const auto dir = std::filesystem::temp_directory_path() / "figlabel_png_test";
  std::filesystem::create_directories(dir);
  const auto file = dir / "page-0000.png";

  std::mt19937 rng(127);
  PageRaster page = PageRaster::blank(37, 23, 150.0);
  std::uniform_int_distribution<int> byte(0, 255);
  for (auto& b : page.pixels) b = static_cast<std::uint8_t>(byte(rng));

  write_png(file, page);
  const PageRaster back = read_png(file, 150.0);
  CHECK(back.width == page.width);
  CHECK(back.height == page.height);
  CHECK(back.dpi == 150.0);
  CHECK(back.pixels == page.pixels);

  std::filesystem::remove_all(dir);
}

TEST_CASE("read_png reports missing and malformed files") {
  CHECK_THROWS_AS(read_png("/nonexistent/figlabel.png"), Error);

  const auto dir = std::filesystem::temp_directory_path() / "figlabel_png_bad";
  std::filesystem::create_directories(dir);
  const auto file = dir / "bad.png";
  std::ofstream(file) << "this is not a png";
  CHECK_THROWS_AS(read_png(file), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("luminance uses the Rec. 601 weights") {
  PageRaster page = PageRaster::blank(2, 1);
  page.set(0, 0, {255, 0, 0});
  page.set(1, 0, {0, 255, 0});
  const GrayImage g = luminance(page);
  CHECK(g.at(0, 0) == doctest::Approx(0.299 * 255));
  CHECK(g.at(1, 0) == doctest::Approx(0.587 * 255));
}

TEST_CASE("resize preserves constant images and total mass on downscale") {
  GrayImage flat = GrayImage::zeros(40, 30);
  for (double& v : flat.values) v = 77.0;
  for (const auto [w, h] : {std::pair{20, 15}, std::pair{80, 60}, std::pair{33, 14}}) {
    const GrayImage r = resize(flat, w, h);
    for (double v : r.values) CHECK(v == doctest::Approx(77.0));
  }

  // Area averaging preserves the mean exactly for integer factors.
  GrayImage ramp = GrayImage::zeros(16, 16);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) ramp.at(x, y) = x * 16.0 + y;
  }
  const GrayImage half = resize(ramp, 8, 8);
  double src_mean = 0, dst_mean = 0;
  for (double v : ramp.values) src_mean += v;
  for (double v : half.values) dst_mean += v;
  CHECK(dst_mean / half.values.size() ==
        doctest::Approx(src_mean / ramp.values.size()));

  CHECK_THROWS_AS(resize(flat, 0, 5), Error);
}

TEST_CASE("count_indexed_files detects gaps") {
  const auto dir = std::filesystem::temp_directory_path() / "figlabel_pages_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);

  write_png(dir / "page-0000.png", PageRaster::blank(4, 4));
  write_png(dir / "page-0001.png", PageRaster::blank(4, 4));
  CHECK(count_page_files(dir) == 2);

  write_png(dir / "page-0003.png", PageRaster::blank(4, 4));
  try {
    count_page_files(dir);
    FAIL("expected a missing-page error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("page-0002.png") != std::string::npos);
  }

  std::filesystem::remove_all(dir);
}

TEST_CASE("page_file_name formats indices") {
  CHECK(page_file_name(0) == "page-0000.png");
  CHECK(page_file_name(37) == "page-0037.png");
}
