#include "fatiguescope/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "fatiguescope/error.hpp"

namespace fatiguescope::roi {

Image::Image(std::size_t width, std::size_t height, std::size_t channels, float fill)
    : width_(width), height_(height), channels_(channels), pixels_(width * height * channels, fill) {
  if (channels != 1 && channels != 3) throw Error(ErrorCategory::validation, "images have 1 or 3 channels");
}

namespace {

class HeaderReader {
 public:
  HeaderReader(const std::string& data, const std::string& name) : data_(data), name_(name) {}

  std::size_t number() {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < data_.size() && std::isdigit(static_cast<unsigned char>(data_[pos_]))) ++pos_;
    if (start == pos_) throw Error(ErrorCategory::parse, name_ + ": malformed netpbm header");
    return std::stoul(data_.substr(start, pos_ - start));
  }

  // Binary formats: exactly one whitespace byte follows the last header field.
  std::size_t raster_start() const { return pos_ + 1; }

 private:
  void skip_space() {
    while (pos_ < data_.size()) {
      if (data_[pos_] == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(data_[pos_]))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& data_;
  const std::string& name_;
  std::size_t pos_ = 2;  // past the magic number
};

}  // namespace

Image load_netpbm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::io, "cannot open image " + path.string());
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (data.size() < 2 || data[0] != 'P') throw Error(ErrorCategory::parse, name + ": not a netpbm image");
  const char kind = data[1];
  if (kind != '2' && kind != '3' && kind != '5' && kind != '6') {
    throw Error(ErrorCategory::parse, name + ": unsupported netpbm variant P" + std::string(1, kind));
  }
  const std::size_t channels = (kind == '3' || kind == '6') ? 3 : 1;
  HeaderReader header(data, name);
  const std::size_t width = header.number();
  const std::size_t height = header.number();
  const std::size_t maxval = header.number();
  if (width == 0 || height == 0 || maxval == 0 || maxval > 65535) {
    throw Error(ErrorCategory::parse, name + ": invalid netpbm dimensions");
  }
  Image img(width, height, channels);
  auto& px = img.pixels();
  const auto scale = static_cast<float>(maxval);
  const std::size_t count = width * height * channels;

  if (kind == '2' || kind == '3') {
    for (std::size_t i = 0; i < count; ++i) px[i] = static_cast<float>(header.number()) / scale;
  } else {
    const std::size_t bytes = maxval > 255 ? 2 : 1;
    const std::size_t start = header.raster_start();
    if (data.size() < start + count * bytes) throw Error(ErrorCategory::parse, name + ": truncated raster");
    for (std::size_t i = 0; i < count; ++i) {
      const auto* p = reinterpret_cast<const unsigned char*>(data.data() + start + i * bytes);
      const unsigned v = bytes == 2 ? (unsigned{p[0]} << 8) | p[1] : p[0];
      px[i] = static_cast<float>(v) / scale;
    }
  }
  for (auto& v : px) v = std::min(v, 1.0f);
  return img;
}

void save_pgm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCategory::io, "cannot write " + path.string());
  out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
  for (std::size_t y = 0; y < image.height(); ++y) {
    for (std::size_t x = 0; x < image.width(); ++x) {
      const float v = std::clamp(image.at(x, y, 0), 0.0f, 1.0f);
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0f))));
    }
  }
}

Image crop(const Image& image, const PixelRect& rect) {
  if (rect.x1 > image.width() || rect.y1 > image.height() || rect.x0 >= rect.x1 || rect.y0 >= rect.y1) {
    throw Error(ErrorCategory::degenerate, "crop window outside the image");
  }
  Image out(rect.width(), rect.height(), image.channels());
  for (std::size_t y = 0; y < rect.height(); ++y) {
    for (std::size_t x = 0; x < rect.width(); ++x) {
      for (std::size_t c = 0; c < image.channels(); ++c) out.at(x, y, c) = image.at(rect.x0 + x, rect.y0 + y, c);
    }
  }
  return out;
}

Image resize_bilinear(const Image& image, std::size_t width, std::size_t height) {
  if (image.empty() || width == 0 || height == 0) throw Error(ErrorCategory::degenerate, "resize of empty image");
  Image out(width, height, image.channels());
  const double sx = static_cast<double>(image.width()) / static_cast<double>(width);
  const double sy = static_cast<double>(image.height()) / static_cast<double>(height);
  const double max_x = static_cast<double>(image.width() - 1);
  const double max_y = static_cast<double>(image.height() - 1);
  for (std::size_t y = 0; y < height; ++y) {
    const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0, max_y);
    const auto y0 = static_cast<std::size_t>(std::floor(fy));
    const std::size_t y1 = std::min(y0 + 1, image.height() - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0, max_x);
      const auto x0 = static_cast<std::size_t>(std::floor(fx));
      const std::size_t x1 = std::min(x0 + 1, image.width() - 1);
      const double wx = fx - static_cast<double>(x0);
      for (std::size_t c = 0; c < image.channels(); ++c) {
        const double top = image.at(x0, y0, c) * (1.0 - wx) + image.at(x1, y0, c) * wx;
        const double bottom = image.at(x0, y1, c) * (1.0 - wx) + image.at(x1, y1, c) * wx;
        out.at(x, y, c) = static_cast<float>(top * (1.0 - wy) + bottom * wy);
      }
    }
  }
  return out;
}

}  // namespace fatiguescope::roi
