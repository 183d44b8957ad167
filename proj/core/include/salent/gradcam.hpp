#pragma once

#include <string>
#include <vector>

#include "salent/engine.hpp"
#include "salent/net.hpp"
#include "salent/tensor.hpp"

namespace salent {

/// Per-channel importance weights: spatial means of the class-logit
/// gradient at one layer.
struct ImportanceWeights {
  std::vector<double> alpha;
};

/// Unquantized 2-d map.
struct FloatMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major
};

struct SaliencyMap {
  GrayMap map;
  std::string layer_name;
  int class_index = 0;
  double raw_min = 0.0;  // pre-quantization range
  double raw_max = 0.0;

  bool operator==(const SaliencyMap&) const = default;
};

/// alpha[k] = mean over (i,j) of grad[k,i,j]; grad is (c,h,w).
ImportanceWeights importance_weights(const Tensor& grad);

/// Elementwise max(0, sum_k alpha[k]*A[k,.,.]).
FloatMap raw_cam(const Tensor& activations, const ImportanceWeights& weights);

/// Min-max normalize to [0,255] with g = floor(255*(v-min)/(max-min) + 0.5).
/// A constant map quantizes to all zeros. NaN/Inf input is rejected.
GrayMap quantize(const FloatMap& map);

/// True for layers whose output keeps spatial extent (conv/relu/maxpool
/// before the flatten).
bool is_spatial_layer(const NetworkSpec& spec, const std::string& layer_name);

/// forward -> backward_to_layer -> importance_weights -> raw_cam -> quantize.
SaliencyMap gradcam(const NetworkSpec& spec, const Weights& weights,
                    const Tensor& image, int class_index,
                    const std::string& layer_name);

}  // namespace salent
