#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ocfk {

// Binary silhouette raster: pixels row-major, top row first, values 0 or 1.
struct BinaryImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<size_t>(y) * width + x]; }
  size_t lit_count() const;
};

BinaryImage make_image(int width, int height);

// PGM (P5, maxval 255); values >= 128 read as lit.
BinaryImage load_pgm(const std::string& path);
void save_pgm(const std::string& path, const BinaryImage& image);

}  // namespace ocfk
