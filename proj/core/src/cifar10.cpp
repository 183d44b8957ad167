#include "salent/cifar10.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace salent {

namespace {
constexpr size_t kRecordBytes = 3073;  // 1 label + 3*32*32 pixels
constexpr int64_t kPixelsPerImage = 3 * 32 * 32;

[[noreturn]] void fail(const std::string& what) {
  throw std::runtime_error("cifar10: " + what);
}
}  // namespace

Dataset read_cifar10_batch(std::span<const uint8_t> bytes) {
  if (bytes.empty() || bytes.size() % kRecordBytes != 0) {
    fail("batch length " + std::to_string(bytes.size()) +
         " is not a positive multiple of 3073");
  }
  const int64_t n = static_cast<int64_t>(bytes.size() / kRecordBytes);

  Dataset ds;
  ds.labels.resize(static_cast<size_t>(n));
  std::vector<float> images(static_cast<size_t>(n * kPixelsPerImage));
  for (int64_t r = 0; r < n; ++r) {
    const uint8_t* rec = bytes.data() + r * kRecordBytes;
    if (rec[0] > 9) {
      fail("record " + std::to_string(r) + " has label " + std::to_string(rec[0]));
    }
    ds.labels[static_cast<size_t>(r)] = rec[0];
    float* dst = images.data() + r * kPixelsPerImage;
    for (int64_t p = 0; p < kPixelsPerImage; ++p) {
      dst[p] = static_cast<float>(rec[1 + p]) / 255.0f;
    }
  }
  ds.images = Tensor({n, 3, 32, 32}, std::move(images));
  return ds;
}

Dataset load_cifar10_batches(const std::vector<std::filesystem::path>& paths) {
  std::vector<uint8_t> all;
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open " + path.string());
    all.insert(all.end(), std::istreambuf_iterator<char>(in),
               std::istreambuf_iterator<char>());
  }
  return read_cifar10_batch(all);
}

std::vector<uint8_t> write_cifar10_batch(const Dataset& ds) {
  if (ds.images.rank() != 4 || ds.images.dim(1) != 3 || ds.images.dim(2) != 32 ||
      ds.images.dim(3) != 32) {
    fail("writer expects (N,3,32,32) images");
  }
  const int64_t n = ds.images.dim(0);
  if (static_cast<int64_t>(ds.labels.size()) != n) fail("label count mismatch");

  std::vector<uint8_t> out(static_cast<size_t>(n) * kRecordBytes);
  for (int64_t r = 0; r < n; ++r) {
    const int label = ds.labels[static_cast<size_t>(r)];
    if (label < 0 || label > 9) fail("label out of range [0,9]");
    uint8_t* rec = out.data() + r * kRecordBytes;
    rec[0] = static_cast<uint8_t>(label);
    const float* src = ds.images.data() + r * kPixelsPerImage;
    for (int64_t p = 0; p < kPixelsPerImage; ++p) {
      const double v = std::floor(src[p] * 255.0 + 0.5);
      rec[1 + p] = static_cast<uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
    }
  }
  return out;
}

}  // namespace salent
