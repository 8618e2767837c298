#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace attrdesc {

struct Rgb {
  float r = 0.0f;
  float g = 0.0f;
  float b = 0.0f;

  bool operator==(const Rgb&) const = default;
};

/// Row-major RGB image with channels in [0,1].
class Image {
 public:
  Image() = default;
  Image(int width, int height, Rgb fill = {});

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }

  Rgb& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  const Rgb& at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

  const std::vector<Rgb>& pixels() const { return pixels_; }
  std::vector<Rgb>& pixels() { return pixels_; }

  bool operator==(const Image&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Rgb> pixels_;
};

/// Per-pixel coverage flags, same layout as Image.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  Mask() = default;
  Mask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

  bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v = true) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
  std::size_t count() const;
};

/// Luminance, Rec. 601 weights.
inline double luminance(const Rgb& p) { return 0.299 * p.r + 0.587 * p.g + 0.114 * p.b; }

/// 8-bit quantization used by the on-disk format.
std::uint8_t to_byte(float channel);

/// Binary PPM (P6), 8 bits per channel.
void write_ppm(const std::filesystem::path& path, const Image& image);
Image read_ppm(const std::filesystem::path& path);

/// Round-trips an image through 8-bit quantization, i.e. what a reader of
/// the written file sees.
Image quantize8(const Image& image);

}  // namespace attrdesc
