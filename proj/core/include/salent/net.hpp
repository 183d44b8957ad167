#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "salent/tensor.hpp"

namespace salent {

enum class LayerKind { conv, relu, maxpool, flatten, linear };

const char* to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& s);

/// One layer of a sequential network. Only the fields of the active kind
/// are meaningful; unused fields stay zero.
struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  std::string name;

  // conv
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 0;  // also maxpool window
  int stride = 0;
  int padding = 0;

  // linear
  int in_features = 0;
  int out_features = 0;

  static LayerSpec conv(std::string name, int in, int out, int kernel = 3,
                        int stride = 1, int padding = 0);
  static LayerSpec relu(std::string name);
  static LayerSpec maxpool(std::string name, int kernel = 2, int stride = 0);
  static LayerSpec flatten(std::string name);
  static LayerSpec linear(std::string name, int in, int out);
};

/// Declarative sequential architecture.
struct NetworkSpec {
  std::array<int, 3> input_shape{};  // C,H,W
  std::vector<LayerSpec> layers;
  int class_count = 0;

  int layer_index(const std::string& name) const;  // -1 when absent
};

/// Output shape of one layer: spatial (c,h,w) or flat (features).
struct LayerShape {
  bool spatial = false;
  int c = 0, h = 0, w = 0;  // valid when spatial
  int features = 0;         // element count either way
};

/// Validates the chain and returns per-layer output shapes.
/// Throws naming the first offending layer.
std::vector<LayerShape> infer_shapes(const NetworkSpec& spec);

/// Learnable parameter count: conv out*(in*k*k+1) plus linear out*(in+1).
int64_t count_params(const NetworkSpec& spec);

NetworkSpec spec_from_json(const std::string& text);
std::string spec_to_json(const NetworkSpec& spec);
NetworkSpec load_spec(const std::filesystem::path& path);

/// FNV-1a over the canonical JSON form, as fixed-width hex.
std::string spec_fingerprint(const NetworkSpec& spec);

/// Parameters parallel to spec.layers; parameterless layers hold empty
/// tensors. Conv kernels are (out,in,k,k), linear matrices (out,in).
struct Weights {
  std::vector<Tensor> kernels;
  std::vector<Tensor> biases;
};

/// Directory layout: <layer>.weight.npy / <layer>.bias.npy per parameterized
/// layer plus spec.json.
void save_weights(const std::filesystem::path& dir, const NetworkSpec& spec,
                  const Weights& weights);
Weights load_weights(const std::filesystem::path& dir, const NetworkSpec& spec);

}  // namespace salent
