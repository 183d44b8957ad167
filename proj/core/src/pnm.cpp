#include "salent/pnm.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

namespace salent {

namespace {

[[noreturn]] void fail(const std::string& what) {
  throw std::runtime_error("pnm: " + what);
}

void append_header(std::vector<uint8_t>& out, const char* magic, int w, int h) {
  const std::string header =
      std::string(magic) + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  out.insert(out.end(), header.begin(), header.end());
}

// Reads the next integer token, skipping whitespace and '#' comments.
struct TokenReader {
  std::span<const uint8_t> bytes;
  size_t pos = 0;

  int next_int(const char* what) {
    for (;;) {
      while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
      fail(std::string("expected ") + what);
    }
    long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > 1 << 30) fail(std::string(what) + " out of range");
      ++pos;
    }
    return static_cast<int>(v);
  }
};

}  // namespace

std::vector<uint8_t> write_image(const GrayMap& map) {
  std::vector<uint8_t> out;
  out.reserve(map.pixels.size() + 32);
  append_header(out, "P5", map.width, map.height);
  out.insert(out.end(), map.pixels.begin(), map.pixels.end());
  return out;
}

std::vector<uint8_t> write_image(const RgbMap& map) {
  std::vector<uint8_t> out;
  out.reserve(map.pixels.size() + 32);
  append_header(out, "P6", map.width, map.height);
  out.insert(out.end(), map.pixels.begin(), map.pixels.end());
  return out;
}

GrayMap read_pgm(std::span<const uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    fail("expected binary PGM magic P5");
  }
  TokenReader reader{bytes, 2};
  const int w = reader.next_int("width");
  const int h = reader.next_int("height");
  const int maxval = reader.next_int("maxval");
  if (w < 1 || h < 1) fail("empty image");
  if (maxval != 255) fail("maxval must be 255, got " + std::to_string(maxval));
  // exactly one whitespace byte separates the header from the payload
  if (reader.pos >= bytes.size() || !std::isspace(bytes[reader.pos])) {
    fail("missing separator after maxval");
  }
  ++reader.pos;
  const size_t need = static_cast<size_t>(w) * h;
  if (bytes.size() - reader.pos < need) fail("payload shorter than width*height");
  std::vector<uint8_t> pixels(bytes.begin() + reader.pos,
                              bytes.begin() + reader.pos + need);
  return GrayMap(w, h, std::move(pixels));
}

GrayMap load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return read_pgm(bytes);
}

namespace {
void write_bytes(const std::filesystem::path& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail("short write to " + path.string());
}
}  // namespace

void save_image(const std::filesystem::path& path, const GrayMap& map) {
  write_bytes(path, write_image(map));
}

void save_image(const std::filesystem::path& path, const RgbMap& map) {
  write_bytes(path, write_image(map));
}

}  // namespace salent
