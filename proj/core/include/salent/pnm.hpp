#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "salent/tensor.hpp"

namespace salent {

/// Binary PGM (P5), maxval 255: "P5\n<w> <h>\n255\n" + row-major samples.
std::vector<uint8_t> write_image(const GrayMap& map);

/// Binary PPM (P6), maxval 255, interleaved RGB samples.
std::vector<uint8_t> write_image(const RgbMap& map);

/// Parse binary PGM. Whitespace and '#' comments between header tokens are
/// allowed; maxval must be 255.
GrayMap read_pgm(std::span<const uint8_t> bytes);

GrayMap load_pgm(const std::filesystem::path& path);
void save_image(const std::filesystem::path& path, const GrayMap& map);
void save_image(const std::filesystem::path& path, const RgbMap& map);

}  // namespace salent
