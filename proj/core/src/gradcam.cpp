#include "salent/gradcam.hpp"

#include <cmath>
#include <stdexcept>

namespace salent {

namespace {
[[noreturn]] void fail(const std::string& what) {
  throw std::runtime_error("gradcam: " + what);
}
}  // namespace

ImportanceWeights importance_weights(const Tensor& grad) {
  if (grad.rank() != 3) fail("gradient tensor must be (c,h,w)");
  const int64_t c = grad.dim(0), h = grad.dim(1), w = grad.dim(2);
  ImportanceWeights iw;
  iw.alpha.resize(static_cast<size_t>(c));
  const double inv = 1.0 / static_cast<double>(h * w);
  for (int64_t k = 0; k < c; ++k) {
    double sum = 0.0;
    const float* plane = grad.data() + k * h * w;
    for (int64_t i = 0; i < h * w; ++i) sum += plane[i];
    iw.alpha[static_cast<size_t>(k)] = sum * inv;
  }
  return iw;
}

FloatMap raw_cam(const Tensor& activations, const ImportanceWeights& weights) {
  if (activations.rank() != 3) fail("activation tensor must be (c,h,w)");
  const int64_t c = activations.dim(0), h = activations.dim(1), w = activations.dim(2);
  if (static_cast<int64_t>(weights.alpha.size()) != c) {
    fail("importance weights cover " + std::to_string(weights.alpha.size()) +
         " channels, feature map has " + std::to_string(c));
  }
  FloatMap map;
  map.width = static_cast<int>(w);
  map.height = static_cast<int>(h);
  map.values.assign(static_cast<size_t>(h * w), 0.0);
  for (int64_t k = 0; k < c; ++k) {
    const double a = weights.alpha[static_cast<size_t>(k)];
    const float* plane = activations.data() + k * h * w;
    for (int64_t i = 0; i < h * w; ++i) {
      map.values[static_cast<size_t>(i)] += a * plane[i];
    }
  }
  for (double& v : map.values) v = v > 0.0 ? v : 0.0;
  return map;
}

GrayMap quantize(const FloatMap& map) {
  if (map.values.empty()) fail("empty map");
  double lo = map.values[0], hi = map.values[0];
  for (double v : map.values) {
    if (!std::isfinite(v)) fail("non-finite value in map");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  GrayMap out(map.width, map.height);
  if (hi > lo) {
    const double scale = 255.0 / (hi - lo);
    for (size_t i = 0; i < map.values.size(); ++i) {
      out.pixels[i] = static_cast<uint8_t>(
          std::floor((map.values[i] - lo) * scale + 0.5));
    }
  }
  return out;  // constant input: all zeros
}

bool is_spatial_layer(const NetworkSpec& spec, const std::string& layer_name) {
  const int idx = spec.layer_index(layer_name);
  if (idx < 0) fail("unknown layer '" + layer_name + "'");
  return infer_shapes(spec)[static_cast<size_t>(idx)].spatial;
}

SaliencyMap gradcam(const NetworkSpec& spec, const Weights& weights,
                    const Tensor& image, int class_index,
                    const std::string& layer_name) {
  if (!is_spatial_layer(spec, layer_name)) {
    fail("layer '" + layer_name + "' has no spatial output");
  }
  const ForwardResult fwd = forward(spec, weights, image);
  const Tensor grad =
      backward_to_layer(spec, weights, fwd.cache, class_index, layer_name);
  const Tensor& activation = fwd.cache.output_of(layer_name);
  const FloatMap raw = raw_cam(activation, importance_weights(grad));

  SaliencyMap sal;
  sal.layer_name = layer_name;
  sal.class_index = class_index;
  sal.raw_min = raw.values[0];
  sal.raw_max = raw.values[0];
  for (double v : raw.values) {
    sal.raw_min = std::min(sal.raw_min, v);
    sal.raw_max = std::max(sal.raw_max, v);
  }
  sal.map = quantize(raw);
  return sal;
}

}  // namespace salent
