#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace fatiguescope::roi {

// Interleaved pixel buffer with channel intensities in [0,1].
class Image {
 public:
  Image() = default;
  Image(std::size_t width, std::size_t height, std::size_t channels, float fill = 0.0f);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t channels() const { return channels_; }
  bool empty() const { return pixels_.empty(); }

  float at(std::size_t x, std::size_t y, std::size_t c) const {
    return pixels_[(y * width_ + x) * channels_ + c];
  }
  float& at(std::size_t x, std::size_t y, std::size_t c) { return pixels_[(y * width_ + x) * channels_ + c]; }
  const std::vector<float>& pixels() const { return pixels_; }
  std::vector<float>& pixels() { return pixels_; }

  bool operator==(const Image&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t channels_ = 0;
  std::vector<float> pixels_;
};

// Reads binary or ASCII netpbm (P2, P3, P5, P6), 8- or 16-bit.
// Throws Error(io) / Error(parse).
Image load_netpbm(const std::filesystem::path& path);
void save_pgm(const std::filesystem::path& path, const Image& image);  // 8-bit, channel 0

// Pixel window [x0, x1) x [y0, y1).
struct PixelRect {
  std::size_t x0 = 0;
  std::size_t y0 = 0;
  std::size_t x1 = 0;
  std::size_t y1 = 0;
  std::size_t width() const { return x1 - x0; }
  std::size_t height() const { return y1 - y0; }
};

Image crop(const Image& image, const PixelRect& rect);

// Bilinear resize on pixel centers: source coordinate (d + 0.5) * (src/dst) - 0.5,
// clamped to the image, no rounding of intermediate values.
Image resize_bilinear(const Image& image, std::size_t width, std::size_t height);

}  // namespace fatiguescope::roi
