#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "salent/tensor.hpp"

namespace salent {

/// Decode a CIFAR-10 binary batch: 3073-byte records, one label byte
/// followed by 3072 channel-major (R,G,B) pixels of a 32x32 image.
/// Pixels are scaled by 1/255 into [0,1].
Dataset read_cifar10_batch(std::span<const uint8_t> bytes);

/// Concatenate several batch files into one dataset, in the given order.
Dataset load_cifar10_batches(const std::vector<std::filesystem::path>& paths);

/// Encode a dataset of (N,3,32,32) images back into the batch format.
/// Pixel p is stored as floor(p*255 + 0.5).
std::vector<uint8_t> write_cifar10_batch(const Dataset& ds);

}  // namespace salent
