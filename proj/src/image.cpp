#include "ocfk/image.hpp"

#include <fstream>
#include <stdexcept>

#include "ocfk/io_util.hpp"

namespace ocfk {

size_t BinaryImage::lit_count() const {
  size_t n = 0;
  for (std::uint8_t p : pixels) n += (p != 0);
  return n;
}

BinaryImage make_image(int width, int height) {
  BinaryImage img;
  img.width = width;
  img.height = height;
  img.pixels.assign(static_cast<size_t>(width) * height, 0);
  return img;
}

BinaryImage load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);

  auto next_token = [&]() -> std::string {
    std::string tok;
    for (;;) {
      int c = in.get();
      if (c == EOF) throw std::runtime_error(path + ": truncated PGM header");
      if (c == '#') {  // comment to end of line
        while (c != EOF && c != '\n') c = in.get();
        continue;
      }
      if (std::isspace(c)) {
        if (!tok.empty()) return tok;
        continue;
      }
      tok.push_back(static_cast<char>(c));
    }
  };

  if (next_token() != "P5") throw std::runtime_error(path + ": expected binary PGM (P5)");
  const int width = std::stoi(next_token());
  const int height = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255) {
    throw std::runtime_error(path + ": unsupported PGM dimensions");
  }
  // header ends with exactly one whitespace byte, already consumed by tokenizer

  BinaryImage img = make_image(width, height);
  std::vector<char> raw(static_cast<size_t>(width) * height);
  in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (!in) throw std::runtime_error(path + ": truncated PGM payload");
  for (size_t i = 0; i < raw.size(); ++i) {
    img.pixels[i] = static_cast<std::uint8_t>(raw[i]) >= 128 ? 1 : 0;
  }
  return img;
}

void save_pgm(const std::string& path, const BinaryImage& image) {
  AtomicFileWriter writer(path, true);
  std::ostream& os = writer.stream();
  os << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  std::vector<char> raw(image.pixels.size());
  for (size_t i = 0; i < raw.size(); ++i) {
    raw[i] = static_cast<char>(image.pixels[i] ? 255 : 0);
  }
  os.write(raw.data(), static_cast<std::streamsize>(raw.size()));
  writer.commit();
}

}  // namespace ocfk
