#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace figlabel {

// One rasterized page: 8-bit RGB, row-major, origin at the top-left.
struct PageRaster {
  int width = 0;
  int height = 0;
  double dpi = 100.0;
  std::vector<std::uint8_t> pixels;  // 3 * width * height bytes

  static PageRaster blank(int width, int height, double dpi = 100.0,
                          std::array<std::uint8_t, 3> fill = {255, 255, 255});

  std::array<std::uint8_t, 3> at(int x, int y) const {
    const std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }
  void set(int x, int y, std::array<std::uint8_t, 3> rgb) {
    const std::size_t i = 3 * (static_cast<std::size_t>(y) * width + x);
    pixels[i] = rgb[0];
    pixels[i + 1] = rgb[1];
    pixels[i + 2] = rgb[2];
  }
};

// Single-channel double-precision image used by template matching.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major

  static GrayImage zeros(int width, int height) {
    return GrayImage{width, height,
                     std::vector<double>(static_cast<std::size_t>(width) * height, 0.0)};
  }
  double at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  double& at(int x, int y) {
    return values[static_cast<std::size_t>(y) * width + x];
  }
};

// Rec. 601 luma: 0.299 R + 0.587 G + 0.114 B.
GrayImage luminance(const PageRaster& page);

// Resamples to the requested size: area averaging when shrinking, bilinear
// when growing. Identity when the size is unchanged.
GrayImage resize(const GrayImage& src, int out_width, int out_height);

// 8-bit RGB PNG files. read_png accepts gray/palette/alpha variants and
// normalizes them to RGB; `dpi` is recorded on the returned raster (the files
// themselves are treated as resolution-free).
PageRaster read_png(const std::filesystem::path& path, double dpi = 100.0);
void write_png(const std::filesystem::path& path, const PageRaster& page);

// Formats a page file name, e.g. page_file_name(3) == "page-0003.png".
std::string page_file_name(int page_index);

// Counts contiguous `<prefix>%04d<suffix>` files starting at index 0.
// Throws when none exist or when a later index is present with an earlier
// one missing (the gap is reported by file name).
int count_indexed_files(const std::filesystem::path& dir,
                        const std::string& prefix, const std::string& suffix);
int count_page_files(const std::filesystem::path& dir);

}  // namespace figlabel
