#include "sdfilter/image.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <png.h>

#include "sdfilter/errors.h"

namespace sdfilter {

namespace {

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

}  // namespace

Image::Image(int w, int h, const Vec3& fill)
    : width(w), height(h), data(3 * static_cast<std::size_t>(w) * h) {
  for (std::size_t i = 0; i < data.size(); i += 3) {
    data[i] = fill[0];
    data[i + 1] = fill[1];
    data[i + 2] = fill[2];
  }
}

ImageFormat image_format_for(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return ImageFormat::Png;
  if (ext == ".ppm") return ImageFormat::Ppm;
  throw InvalidArgument("unsupported image format: " + path.string());
}

Image decode_ppm(const std::string& bytes) {
  std::size_t pos = 0;
  auto next_token = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  if (next_token() != "P6") throw InvalidArgument("not a binary PPM (P6) image");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token());
    h = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    throw InvalidArgument("malformed PPM header");
  }
  if (w <= 0 || h <= 0 || maxval != 255) throw InvalidArgument("unsupported PPM header");
  ++pos;  // single whitespace after maxval
  const std::size_t need = 3 * static_cast<std::size_t>(w) * h;
  if (bytes.size() < pos + need) throw InvalidArgument("truncated PPM data");
  Image img(w, h);
  for (std::size_t i = 0; i < need; ++i) {
    img.data[i] = static_cast<unsigned char>(bytes[pos + i]) / 255.0;
  }
  return img;
}

std::string encode_ppm(const Image& image) {
  std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                    "\n255\n";
  out.reserve(out.size() + image.data.size());
  for (double v : image.data) out.push_back(static_cast<char>(to_byte(v)));
  return out;
}

Image load_image(const std::filesystem::path& path) {
  if (image_format_for(path) == ImageFormat::Ppm) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return decode_ppm(ss.str());
  }
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str())) {
    throw InvalidArgument("cannot read PNG " + path.string() + ": " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&png);
    throw InvalidArgument("cannot decode PNG " + path.string() + ": " + png.message);
  }
  Image img(static_cast<int>(png.width), static_cast<int>(png.height));
  for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = buffer[i] / 255.0;
  return img;
}

void save_image(const Image& image, const std::filesystem::path& path) {
  if (image_format_for(path) == ImageFormat::Ppm) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    const std::string bytes = encode_ppm(image);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    return;
  }
  std::vector<png_byte> buffer(image.data.size());
  for (std::size_t i = 0; i < buffer.size(); ++i) buffer[i] = to_byte(image.data[i]);
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, buffer.data(), 0, nullptr)) {
    throw InvalidArgument("cannot write PNG " + path.string() + ": " + png.message);
  }
}

}  // namespace sdfilter
