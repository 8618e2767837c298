#include "attrdesc/image.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <fstream>
#include <stdexcept>
#include <string>

namespace attrdesc {

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw std::invalid_argument("negative image size");
  pixels_.assign(static_cast<std::size_t>(width) * height, fill);
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

std::uint8_t to_byte(float channel) {
  const float c = std::clamp(channel, 0.0f, 1.0f);
  return static_cast<std::uint8_t>(std::lround(c * 255.0f));
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
  std::vector<std::uint8_t> bytes;
  bytes.reserve(image.pixels().size() * 3);
  for (const Rgb& p : image.pixels()) {
    bytes.push_back(to_byte(p.r));
    bytes.push_back(to_byte(p.g));
    bytes.push_back(to_byte(p.b));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in) {
  std::string token;
  while (in) {
    const int c = in.get();
    if (c == EOF) break;
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
      if (!token.empty()) break;
      continue;
    }
    if (std::isspace(c)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(c));
  }
  return token;
}

}  // namespace

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  if (next_token(in) != "P6") throw std::runtime_error(path.string() + ": not a binary PPM");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token(in));
    h = std::stoi(next_token(in));
    maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw std::runtime_error(path.string() + ": malformed PPM header");
  }
  if (w <= 0 || h <= 0 || maxval != 255) {
    throw std::runtime_error(path.string() + ": unsupported PPM dimensions or depth");
  }
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h * 3);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw std::runtime_error(path.string() + ": truncated pixel data");
  }
  Image img(w, h);
  auto& px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    px[i] = {bytes[3 * i] / 255.0f, bytes[3 * i + 1] / 255.0f, bytes[3 * i + 2] / 255.0f};
  }
  return img;
}

Image quantize8(const Image& image) {
  Image out = image;
  for (Rgb& p : out.pixels()) {
    p = {to_byte(p.r) / 255.0f, to_byte(p.g) / 255.0f, to_byte(p.b) / 255.0f};
  }
  return out;
}

}  // namespace attrdesc
