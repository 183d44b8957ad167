#include "salent/net.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "salent/npy.hpp"

namespace salent {

using nlohmann::json;

namespace {
[[noreturn]] void fail(const std::string& what) {
  throw std::runtime_error("net: " + what);
}
}  // namespace

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv: return "conv";
    case LayerKind::relu: return "relu";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::flatten: return "flatten";
    case LayerKind::linear: return "linear";
  }
  return "?";
}

LayerKind layer_kind_from_string(const std::string& s) {
  if (s == "conv") return LayerKind::conv;
  if (s == "relu") return LayerKind::relu;
  if (s == "maxpool") return LayerKind::maxpool;
  if (s == "flatten") return LayerKind::flatten;
  if (s == "linear") return LayerKind::linear;
  fail("unknown layer kind '" + s + "'");
}

LayerSpec LayerSpec::conv(std::string name, int in, int out, int kernel,
                          int stride, int padding) {
  LayerSpec l;
  l.kind = LayerKind::conv;
  l.name = std::move(name);
  l.in_channels = in;
  l.out_channels = out;
  l.kernel = kernel;
  l.stride = stride;
  l.padding = padding;
  return l;
}

LayerSpec LayerSpec::relu(std::string name) {
  LayerSpec l;
  l.kind = LayerKind::relu;
  l.name = std::move(name);
  return l;
}

LayerSpec LayerSpec::maxpool(std::string name, int kernel, int stride) {
  LayerSpec l;
  l.kind = LayerKind::maxpool;
  l.name = std::move(name);
  l.kernel = kernel;
  l.stride = stride > 0 ? stride : kernel;
  return l;
}

LayerSpec LayerSpec::flatten(std::string name) {
  LayerSpec l;
  l.kind = LayerKind::flatten;
  l.name = std::move(name);
  return l;
}

LayerSpec LayerSpec::linear(std::string name, int in, int out) {
  LayerSpec l;
  l.kind = LayerKind::linear;
  l.name = std::move(name);
  l.in_features = in;
  l.out_features = out;
  return l;
}

int NetworkSpec::layer_index(const std::string& name) const {
  for (size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<LayerShape> infer_shapes(const NetworkSpec& spec) {
  if (spec.input_shape[0] < 1 || spec.input_shape[1] < 1 || spec.input_shape[2] < 1) {
    fail("input shape dims must be positive");
  }
  if (spec.class_count < 1) fail("class_count must be positive");
  if (spec.layers.empty()) fail("network has no layers");

  std::set<std::string> names;
  for (const auto& layer : spec.layers) {
    if (layer.name.empty()) fail("layer with empty name");
    if (!names.insert(layer.name).second) fail("duplicate layer name '" + layer.name + "'");
  }

  LayerShape cur;
  cur.spatial = true;
  cur.c = spec.input_shape[0];
  cur.h = spec.input_shape[1];
  cur.w = spec.input_shape[2];
  cur.features = cur.c * cur.h * cur.w;

  std::vector<LayerShape> shapes;
  shapes.reserve(spec.layers.size());
  for (const auto& layer : spec.layers) {
    switch (layer.kind) {
      case LayerKind::conv: {
        if (!cur.spatial) fail("layer '" + layer.name + "': conv needs a spatial input");
        if (layer.in_channels < 1 || layer.out_channels < 1 || layer.kernel < 1 ||
            layer.stride < 1 || layer.padding < 0) {
          fail("layer '" + layer.name + "': bad conv geometry");
        }
        if (layer.in_channels != cur.c) {
          fail("layer '" + layer.name + "': expects " +
               std::to_string(layer.in_channels) + " input channels, gets " +
               std::to_string(cur.c));
        }
        const int oh = (cur.h + 2 * layer.padding - layer.kernel) / layer.stride + 1;
        const int ow = (cur.w + 2 * layer.padding - layer.kernel) / layer.stride + 1;
        if (cur.h + 2 * layer.padding < layer.kernel || oh < 1 || ow < 1) {
          fail("layer '" + layer.name + "': output would be empty");
        }
        cur = {true, layer.out_channels, oh, ow, layer.out_channels * oh * ow};
        break;
      }
      case LayerKind::relu:
        break;  // shape preserved, spatial or flat
      case LayerKind::maxpool: {
        if (!cur.spatial) fail("layer '" + layer.name + "': maxpool needs a spatial input");
        if (layer.kernel < 1 || layer.stride < 1) {
          fail("layer '" + layer.name + "': bad pool geometry");
        }
        if (cur.h < layer.kernel || cur.w < layer.kernel) {
          fail("layer '" + layer.name + "': window larger than input");
        }
        const int oh = (cur.h - layer.kernel) / layer.stride + 1;
        const int ow = (cur.w - layer.kernel) / layer.stride + 1;
        cur = {true, cur.c, oh, ow, cur.c * oh * ow};
        break;
      }
      case LayerKind::flatten:
        if (!cur.spatial) fail("layer '" + layer.name + "': input is already flat");
        cur = {false, 0, 0, 0, cur.features};
        break;
      case LayerKind::linear: {
        if (cur.spatial) {
          fail("layer '" + layer.name + "': linear needs a flattened input");
        }
        if (layer.in_features < 1 || layer.out_features < 1) {
          fail("layer '" + layer.name + "': bad linear geometry");
        }
        if (layer.in_features != cur.features) {
          fail("layer '" + layer.name + "': expects " +
               std::to_string(layer.in_features) + " input features, gets " +
               std::to_string(cur.features));
        }
        cur = {false, 0, 0, 0, layer.out_features};
        break;
      }
    }
    shapes.push_back(cur);
  }

  const LayerSpec& last = spec.layers.back();
  if (last.kind != LayerKind::linear) fail("final layer must be linear");
  if (last.out_features != spec.class_count) {
    fail("final layer emits " + std::to_string(last.out_features) +
         " features, class_count is " + std::to_string(spec.class_count));
  }
  return shapes;
}

int64_t count_params(const NetworkSpec& spec) {
  int64_t total = 0;
  for (const auto& layer : spec.layers) {
    if (layer.kind == LayerKind::conv) {
      total += static_cast<int64_t>(layer.out_channels) *
               (static_cast<int64_t>(layer.in_channels) * layer.kernel * layer.kernel + 1);
    } else if (layer.kind == LayerKind::linear) {
      total += static_cast<int64_t>(layer.out_features) * (layer.in_features + 1);
    }
  }
  return total;
}

NetworkSpec spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("spec JSON: ") + e.what());
  }
  try {
    NetworkSpec spec;
    const auto& in = j.at("input_shape");
    if (!in.is_array() || in.size() != 3) fail("input_shape must have 3 entries");
    for (int i = 0; i < 3; ++i) spec.input_shape[static_cast<size_t>(i)] = in[static_cast<size_t>(i)].get<int>();
    spec.class_count = j.at("class_count").get<int>();
    for (const auto& jl : j.at("layers")) {
      LayerSpec l;
      l.kind = layer_kind_from_string(jl.at("kind").get<std::string>());
      l.name = jl.at("name").get<std::string>();
      switch (l.kind) {
        case LayerKind::conv:
          l.in_channels = jl.at("in").get<int>();
          l.out_channels = jl.at("out").get<int>();
          l.kernel = jl.value("kernel", 3);
          l.stride = jl.value("stride", 1);
          l.padding = jl.value("padding", 0);
          break;
        case LayerKind::maxpool:
          l.kernel = jl.value("kernel", 2);
          l.stride = jl.value("stride", l.kernel);
          break;
        case LayerKind::linear:
          l.in_features = jl.at("in").get<int>();
          l.out_features = jl.at("out").get<int>();
          break;
        case LayerKind::relu:
        case LayerKind::flatten:
          break;
      }
      spec.layers.push_back(std::move(l));
    }
    return spec;
  } catch (const json::exception& e) {
    fail(std::string("spec JSON: ") + e.what());
  }
}

std::string spec_to_json(const NetworkSpec& spec) {
  json layers = json::array();
  for (const auto& l : spec.layers) {
    json jl{{"kind", to_string(l.kind)}, {"name", l.name}};
    switch (l.kind) {
      case LayerKind::conv:
        jl["in"] = l.in_channels;
        jl["out"] = l.out_channels;
        jl["kernel"] = l.kernel;
        jl["stride"] = l.stride;
        jl["padding"] = l.padding;
        break;
      case LayerKind::maxpool:
        jl["kernel"] = l.kernel;
        jl["stride"] = l.stride;
        break;
      case LayerKind::linear:
        jl["in"] = l.in_features;
        jl["out"] = l.out_features;
        break;
      case LayerKind::relu:
      case LayerKind::flatten:
        break;
    }
    layers.push_back(std::move(jl));
  }
  json j{{"input_shape", {spec.input_shape[0], spec.input_shape[1], spec.input_shape[2]}},
         {"class_count", spec.class_count},
         {"layers", layers}};
  return j.dump(2) + "\n";
}

NetworkSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return spec_from_json(ss.str());
}

std::string spec_fingerprint(const NetworkSpec& spec) {
  const std::string canonical = spec_to_json(spec);
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void save_weights(const std::filesystem::path& dir, const NetworkSpec& spec,
                  const Weights& weights) {
  if (weights.kernels.size() != spec.layers.size() ||
      weights.biases.size() != spec.layers.size()) {
    fail("weights are not parallel to the spec");
  }
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "spec.json", std::ios::trunc);
    if (!out) fail("cannot write " + (dir / "spec.json").string());
    out << spec_to_json(spec);
  }
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& layer = spec.layers[i];
    if (layer.kind != LayerKind::conv && layer.kind != LayerKind::linear) continue;
    save_npy(dir / (layer.name + ".weight.npy"), weights.kernels[i]);
    save_npy(dir / (layer.name + ".bias.npy"), weights.biases[i]);
  }
}

Weights load_weights(const std::filesystem::path& dir, const NetworkSpec& spec) {
  Weights weights;
  weights.kernels.resize(spec.layers.size());
  weights.biases.resize(spec.layers.size());
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    const auto& layer = spec.layers[i];
    if (layer.kind == LayerKind::conv) {
      weights.kernels[i] = load_npy(dir / (layer.name + ".weight.npy"));
      weights.biases[i] = load_npy(dir / (layer.name + ".bias.npy"));
      const auto& ks = weights.kernels[i].shape();
      if (ks != std::vector<int64_t>{layer.out_channels, layer.in_channels,
                                     layer.kernel, layer.kernel}) {
        fail("kernel shape mismatch for layer '" + layer.name + "'");
      }
      if (weights.biases[i].shape() != std::vector<int64_t>{layer.out_channels}) {
        fail("bias shape mismatch for layer '" + layer.name + "'");
      }
    } else if (layer.kind == LayerKind::linear) {
      weights.kernels[i] = load_npy(dir / (layer.name + ".weight.npy"));
      weights.biases[i] = load_npy(dir / (layer.name + ".bias.npy"));
      if (weights.kernels[i].shape() !=
          std::vector<int64_t>{layer.out_features, layer.in_features}) {
        fail("matrix shape mismatch for layer '" + layer.name + "'");
      }
      if (weights.biases[i].shape() != std::vector<int64_t>{layer.out_features}) {
        fail("bias shape mismatch for layer '" + layer.name + "'");
      }
    }
  }
  return weights;
}

}  // namespace salent
