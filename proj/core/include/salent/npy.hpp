#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "salent/tensor.hpp"

namespace salent {

/// Parse an NPY v1.0 buffer. Accepts little-endian C-order float32 or
/// float64 payloads (float64 is narrowed to float32). Anything else is
/// rejected with a diagnostic naming the offending header field.
Tensor read_npy(std::span<const uint8_t> bytes);

/// Serialize as NPY v1.0, '<f4', C-order. The header is space-padded so the
/// payload starts on a 64-byte boundary and ends with a newline; identical
/// tensors always produce identical bytes.
std::vector<uint8_t> write_npy(const Tensor& t);

Tensor load_npy(const std::filesystem::path& path);
void save_npy(const std::filesystem::path& path, const Tensor& t);

}  // namespace salent
