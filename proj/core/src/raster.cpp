#include "figlabel/raster.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "figlabel/error.hpp"

namespace figlabel {

PageRaster PageRaster::blank(int width, int height, double dpi,
                             std::array<std::uint8_t, 3> fill) {
  PageRaster page;
  page.width = width;
  page.height = height;
  page.dpi = dpi;
  page.pixels.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < page.pixels.size(); i += 3) {
    page.pixels[i] = fill[0];
    page.pixels[i + 1] = fill[1];
    page.pixels[i + 2] = fill[2];
  }
  return page;
}

GrayImage luminance(const PageRaster& page) {
  GrayImage out = GrayImage::zeros(page.width, page.height);
  const std::uint8_t* p = page.pixels.data();
  for (std::size_t i = 0; i < out.values.size(); ++i, p += 3) {
    out.values[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
  }
  return out;
}

namespace {

GrayImage resize_area(const GrayImage& src, int out_w, int out_h) {
  GrayImage out = GrayImage::zeros(out_w, out_h);
  const double sx = static_cast<double>(src.width) / out_w;
  const double sy = static_cast<double>(src.height) / out_h;
  for (int oy = 0; oy < out_h; ++oy) {
    const double y0 = oy * sy;
    const double y1 = std::min((oy + 1) * sy, static_cast<double>(src.height));
    for (int ox = 0; ox < out_w; ++ox) {
      const double x0 = ox * sx;
      const double x1 = std::min((ox + 1) * sx, static_cast<double>(src.width));
      double sum = 0.0;
      double weight = 0.0;
      for (int y = static_cast<int>(y0); y < static_cast<int>(std::ceil(y1)); ++y) {
        const double wy = std::min<double>(y + 1, y1) - std::max<double>(y, y0);
        if (wy <= 0) continue;
        for (int x = static_cast<int>(x0); x < static_cast<int>(std::ceil(x1)); ++x) {
          const double wx = std::min<double>(x + 1, x1) - std::max<double>(x, x0);
          if (wx <= 0) continue;
          sum += wx * wy * src.at(x, y);
          weight += wx * wy;
        }
      }
      out.at(ox, oy) = weight > 0 ? sum / weight : 0.0;
    }
  }
  return out;
}

GrayImage resize_bilinear(const GrayImage& src, int out_w, int out_h) {
  GrayImage out = GrayImage::zeros(out_w, out_h);
  const double sx = static_cast<double>(src.width) / out_w;
  const double sy = static_cast<double>(src.height) / out_h;
  for (int oy = 0; oy < out_h; ++oy) {
    // Pixel centers map to pixel centers (the usual half-pixel convention).
    double fy = (oy + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(src.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double dy = fy - y0;
    for (int ox = 0; ox < out_w; ++ox) {
      double fx = (ox + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(src.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double dx = fx - x0;
      const double top = src.at(x0, y0) * (1 - dx) + src.at(x1, y0) * dx;
      const double bot = src.at(x0, y1) * (1 - dx) + src.at(x1, y1) * dx;
      out.at(ox, oy) = top * (1 - dy) + bot * dy;
    }
  }
  return out;
}

}  // namespace

GrayImage resize(const GrayImage& src, int out_width, int out_height) {
  if (out_width <= 0 || out_height <= 0 || src.width <= 0 || src.height <= 0)
    throw Error("invalid resize");
  if (out_width == src.width && out_height == src.height) return src;
  const bool shrinking = static_cast<long>(out_width) * out_height <
                         static_cast<long>(src.width) * src.height;
  return shrinking ? resize_area(src, out_width, out_height)
                   : resize_bilinear(src, out_width, out_height);
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

PageRaster read_png(const std::filesystem::path& path, double dpi) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw Error("cannot open file: " + path.string());

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("png init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("png init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error("malformed png: " + path.string());
  }

  png_init_io(png, file.get());
  png_read_info(png, info);

  // Normalize everything to 8-bit RGB.
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  PageRaster page;
  page.width = static_cast<int>(png_get_image_width(png, info));
  page.height = static_cast<int>(png_get_image_height(png, info));
  page.dpi = dpi;
  page.pixels.resize(static_cast<std::size_t>(page.width) * page.height * 3);

  std::vector<png_bytep> rows(page.height);
  for (int y = 0; y < page.height; ++y) {
    rows[y] = page.pixels.data() + static_cast<std::size_t>(y) * page.width * 3;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return page;
}

void write_png(const std::filesystem::path& path, const PageRaster& page) {
  if (page.width <= 0 || page.height <= 0 ||
      page.pixels.size() != static_cast<std::size_t>(page.width) * page.height * 3)
    throw Error("invalid raster");
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw Error("cannot open file: " + path.string());

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("png init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("png init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("png write failed: " + path.string());
  }

  png_init_io(png, file.get());
  png_set_IHDR(png, info, page.width, page.height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < page.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(page.pixels.data() +
                                             static_cast<std::size_t>(y) *
                                                 page.width * 3));
  }
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
}

std::string page_file_name(int page_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "page-%04d.png", page_index);
  return buf;
}

int count_indexed_files(const std::filesystem::path& dir,
                        const std::string& prefix, const std::string& suffix) {
  auto file_name = [&](int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d", index);
    return prefix + buf + suffix;
  };

  int count = 0;
  while (std::filesystem::exists(dir / file_name(count))) ++count;
  if (count == 0)
    throw Error("no " + prefix + "NNNN" + suffix + " files in " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() == prefix.size() + 4 + suffix.size() &&
        name.starts_with(prefix) && name.ends_with(suffix)) {
      const int index = std::atoi(name.substr(prefix.size(), 4).c_str());
      if (index >= count)
        throw Error("missing page file: " + (dir / file_name(count)).string());
    }
  }
  return count;
}

int count_page_files(const std::filesystem::path& dir) {
  return count_indexed_files(dir, "page-", ".png");
}

}  // namespace figlabel
