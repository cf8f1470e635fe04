#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "painreg/error.hpp"

namespace painreg {

template <typename T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(static_cast<size_t>(width) * height, fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  T& at(int x, int y) { return data_[static_cast<size_t>(y) * width_ + x]; }
  const T& at(int x, int y) const { return data_[static_cast<size_t>(y) * width_ + x]; }

  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

  bool operator==(const Image& o) const {
    return width_ == o.width_ && height_ == o.height_ && data_ == o.data_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using GrayImage = Image<std::uint8_t>;

// Bilinear sample with pixel centers at (i + 0.5, j + 0.5); coordinates outside
// the image clamp to the border (replicate).
inline double bilinear_sample_clamped(const GrayImage& img, double x, double y) {
  const double u = x - 0.5;
  const double v = y - 0.5;
  const int x0 = static_cast<int>(std::floor(u));
  const int y0 = static_cast<int>(std::floor(v));
  const double fx = u - x0;
  const double fy = v - y0;
  auto clampx = [&](int i) { return std::clamp(i, 0, img.width() - 1); };
  auto clampy = [&](int j) { return std::clamp(j, 0, img.height() - 1); };
  const double p00 = img.at(clampx(x0), clampy(y0));
  const double p10 = img.at(clampx(x0 + 1), clampy(y0));
  const double p01 = img.at(clampx(x0), clampy(y0 + 1));
  const double p11 = img.at(clampx(x0 + 1), clampy(y0 + 1));
  return (1.0 - fy) * ((1.0 - fx) * p00 + fx * p10) + fy * ((1.0 - fx) * p01 + fx * p11);
}

// Binary 8-bit PGM (P5).
inline void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(errc::io_error, "cannot open for writing: " + path.string());
  out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data().data()),
            static_cast<std::streamsize>(img.data().size()));
  if (!out) raise(errc::io_error, "write failed: " + path.string());
}

inline GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(errc::io_error, "cannot open: " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P5") raise(errc::parse_error, "not a binary PGM: " + path.string());
  auto next_token = [&]() -> long {
    // skip whitespace and '#' comments
    while (true) {
      int c = in.peek();
      if (c == '#') {
        std::string line;
        std::getline(in, line);
      } else if (std::isspace(c)) {
        in.get();
      } else {
        break;
      }
    }
    long value = 0;
    if (!(in >> value)) raise(errc::parse_error, "malformed PGM header: " + path.string());
    return value;
  };
  const long w = next_token();
  const long h = next_token();
  const long maxval = next_token();
  if (w <= 0 || h <= 0 || maxval != 255)
    raise(errc::parse_error, "unsupported PGM geometry: " + path.string());
  in.get();  // single whitespace after maxval
  GrayImage img(static_cast<int>(w), static_cast<int>(h));
  in.read(reinterpret_cast<char*>(img.data().data()),
          static_cast<std::streamsize>(img.data().size()));
  if (in.gcount() != static_cast<std::streamsize>(img.data().size()))
    raise(errc::parse_error, "truncated PGM payload: " + path.string());
  return img;
}

}  // namespace painreg
