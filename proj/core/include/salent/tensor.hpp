#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace salent {

/// Dense row-major float32 tensor with 1 to 4 dimensions.
/// Images and activations use (batch, channel, height, width) order.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int64_t> shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<size_t>(checked_size(shape_)), 0.0f);
  }

  Tensor(std::vector<int64_t> shape, std::vector<float> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (static_cast<int64_t>(data_.size()) != checked_size(shape_)) {
      throw std::invalid_argument("Tensor: data length does not match shape");
    }
  }

  const std::vector<int64_t>& shape() const { return shape_; }
  size_t rank() const { return shape_.size(); }
  int64_t dim(size_t i) const { return shape_.at(i); }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::vector<float>& values() { return data_; }
  const std::vector<float>& values() const { return data_; }

  float& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  float operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  // (c,h,w) indexing for 3-d tensors
  float at3(int64_t c, int64_t y, int64_t x) const {
    return data_[static_cast<size_t>((c * shape_[1] + y) * shape_[2] + x)];
  }
  float& at3(int64_t c, int64_t y, int64_t x) {
    return data_[static_cast<size_t>((c * shape_[1] + y) * shape_[2] + x)];
  }

  bool operator==(const Tensor&) const = default;

 private:
  static int64_t checked_size(const std::vector<int64_t>& shape) {
    if (shape.empty() || shape.size() > 4) {
      throw std::invalid_argument("Tensor: rank must be between 1 and 4");
    }
    int64_t n = 1;
    for (int64_t d : shape) {
      if (d < 1) throw std::invalid_argument("Tensor: every dim must be >= 1");
      n *= d;
    }
    return n;
  }

  std::vector<int64_t> shape_;
  std::vector<float> data_;
};

/// 2-d grid of integer intensities in [0,255], row-major.
/// at(i,j) addresses row i (height axis), column j (width axis).
struct GrayMap {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;

  GrayMap() = default;
  GrayMap(int w, int h) : width(w), height(h) {
    if (w < 1 || h < 1) throw std::invalid_argument("GrayMap: empty dimensions");
    pixels.assign(static_cast<size_t>(w) * h, 0);
  }
  GrayMap(int w, int h, std::vector<uint8_t> px)
      : width(w), height(h), pixels(std::move(px)) {
    if (w < 1 || h < 1) throw std::invalid_argument("GrayMap: empty dimensions");
    if (pixels.size() != static_cast<size_t>(w) * h) {
      throw std::invalid_argument("GrayMap: pixel count does not match dimensions");
    }
  }

  uint8_t at(int i, int j) const { return pixels[static_cast<size_t>(i) * width + j]; }
  uint8_t& at(int i, int j) { return pixels[static_cast<size_t>(i) * width + j]; }

  bool operator==(const GrayMap&) const = default;
};

/// Interleaved 8-bit RGB image, row-major.
struct RgbMap {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;  // 3 * width * height

  RgbMap() = default;
  RgbMap(int w, int h) : width(w), height(h) {
    if (w < 1 || h < 1) throw std::invalid_argument("RgbMap: empty dimensions");
    pixels.assign(static_cast<size_t>(w) * h * 3, 0);
  }

  bool operator==(const RgbMap&) const = default;
};

/// Labeled image set. Images are (N,C,H,W) with values in [0,1].
struct Dataset {
  Tensor images;
  std::vector<int> labels;

  int64_t count() const { return images.rank() == 4 ? images.dim(0) : 0; }

  /// Copy of image n as a (C,H,W) tensor.
  Tensor image(int64_t n) const {
    const int64_t c = images.dim(1), h = images.dim(2), w = images.dim(3);
    const int64_t stride = c * h * w;
    std::vector<float> out(images.data() + n * stride,
                           images.data() + (n + 1) * stride);
    return Tensor({c, h, w}, std::move(out));
  }
};

}  // namespace salent
