#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sdfilter/mesh.h"

namespace sdfilter {

/// RGB raster with channel values in [0,1], row 0 at the top.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // 3 * width * height, row-major

  Image() = default;
  Image(int w, int h, const Vec3& fill = Vec3::Zero());

  bool empty() const { return width == 0 || height == 0; }
  Vec3 pixel(int x, int y) const {
    const double* p = &data[3 * (static_cast<std::size_t>(y) * width + x)];
    return {p[0], p[1], p[2]};
  }
  void set_pixel(int x, int y, const Vec3& c) {
    double* p = &data[3 * (static_cast<std::size_t>(y) * width + x)];
    p[0] = c[0];
    p[1] = c[1];
    p[2] = c[2];
  }
};

enum class ImageFormat { Png, Ppm };

/// Picks the format from the extension (.png, .ppm); throws otherwise.
ImageFormat image_format_for(const std::filesystem::path& path);

/// Loads an 8-bit RGB(A) PNG or binary (P6, maxval 255) PPM. Alpha is dropped.
Image load_image(const std::filesystem::path& path);
/// Writes 8-bit RGB; values are clamped to [0,1] and rounded.
void save_image(const Image& image, const std::filesystem::path& path);

Image decode_ppm(const std::string& bytes);
std::string encode_ppm(const Image& image);

}  // namespace sdfilter
