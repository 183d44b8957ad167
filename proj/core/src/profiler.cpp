#include "salent/profiler.hpp"

#include <cmath>
#include <cstdio>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "salent/entropy.hpp"
#include "salent/gradcam.hpp"
#include "salent/pnm.hpp"

namespace salent {

using nlohmann::json;

namespace {
[[noreturn]] void fail(const std::string& what) {
  throw std::runtime_error("profiler: " + what);
}

std::string format6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}
}  // namespace

ClassPolicy ClassPolicy::parse(const std::string& text) {
  if (text == "label") return label();
  if (text == "auto" || text == "argmax") return argmax();
  try {
    size_t used = 0;
    const int c = std::stoi(text, &used);
    if (used == text.size() && c >= 0) return fixed(c);
  } catch (const std::exception&) {
  }
  fail("class policy must be 'label', 'auto', or a class index, got '" + text + "'");
}

std::string ClassPolicy::describe() const {
  switch (mode) {
    case Mode::label: return "label";
    case Mode::argmax: return "argmax";
    case Mode::fixed: return "class:" + std::to_string(fixed_class);
  }
  return "?";
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::drop: return "drop";
    case EventKind::rise: return "rise";
    case EventKind::flat: return "flat";
  }
  return "?";
}

namespace {

struct SpatialLayer {
  int index = 0;
  std::string name;
  int h = 0, w = 0;
};

std::vector<SpatialLayer> spatial_layers(const NetworkSpec& spec) {
  const auto shapes = infer_shapes(spec);
  std::vector<SpatialLayer> out;
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    if (shapes[i].spatial) {
      out.push_back({static_cast<int>(i), spec.layers[i].name, shapes[i].h, shapes[i].w});
    }
  }
  return out;
}

struct ImageRow {
  double h0 = 0.0;
  double ame = 0.0;
  double sde = 0.0;
  bool has_sde = false;
};

// Saliency entropies for every spatial layer of one image, one backward
// sweep; identical values to composing gradcam() per layer.
std::vector<ImageRow> profile_rows(const NetworkSpec& spec, const Weights& weights,
                                   const std::vector<SpatialLayer>& layers,
                                   const Tensor& image, int class_index,
                                   bool with_sde, int sde_cap) {
  const ForwardResult fwd = forward(spec, weights, image);
  const auto grads = backward_all_layers(spec, weights, fwd.cache, class_index);
  std::vector<ImageRow> rows;
  rows.reserve(layers.size());
  for (const auto& layer : layers) {
    const size_t idx = static_cast<size_t>(layer.index);
    const FloatMap raw =
        raw_cam(fwd.cache.outputs[idx].second, importance_weights(grads[idx]));
    const GrayMap map = quantize(raw);
    ImageRow row;
    row.h0 = univariate_entropy(map);
    row.ame = aura_matrix_entropy(map);
    if (with_sde && map.width <= sde_cap && map.height <= sde_cap) {
      row.sde = spatial_disorder_entropy(map, {sde_cap});
      row.has_sde = true;
    }
    rows.push_back(row);
  }
  return rows;
}

int class_for_image(const NetworkSpec& spec, const Weights& weights,
                    const Dataset& ds, int64_t index, const ClassPolicy& policy) {
  switch (policy.mode) {
    case ClassPolicy::Mode::label: {
      const int label = ds.labels[static_cast<size_t>(index)];
      if (label < 0 || label >= spec.class_count) fail("label out of range");
      return label;
    }
    case ClassPolicy::Mode::argmax: {
      const auto logits = forward(spec, weights, ds.image(index)).logits;
      int arg = 0;
      for (int i = 1; i < spec.class_count; ++i) {
        if (logits[static_cast<size_t>(i)] > logits[static_cast<size_t>(arg)]) arg = i;
      }
      return arg;
    }
    case ClassPolicy::Mode::fixed:
      if (policy.fixed_class < 0 || policy.fixed_class >= spec.class_count) {
        fail("fixed class out of range");
      }
      return policy.fixed_class;
  }
  fail("bad class policy");
}

}  // namespace

std::vector<LayerEntropy> layer_profile(const NetworkSpec& spec,
                                        const Weights& weights,
                                        const Tensor& image, int class_index) {
  const auto layers = spatial_layers(spec);
  const auto rows = profile_rows(spec, weights, layers, image, class_index,
                                 /*with_sde=*/false, 0);
  std::vector<LayerEntropy> out;
  out.reserve(layers.size());
  for (size_t i = 0; i < layers.size(); ++i) {
    out.push_back({layers[i].name, rows[i].h0, rows[i].ame});
  }
  return out;
}

EntropyProfile dataset_profile(const NetworkSpec& spec, const Weights& weights,
                               const Dataset& dataset,
                               const ProfileOptions& options) {
  const int64_t n = dataset.count();
  if (n == 0) fail("empty dataset");
  const auto layers = spatial_layers(spec);
  if (layers.empty()) fail("network has no spatial layers");

  std::vector<std::vector<ImageRow>> per_image(static_cast<size_t>(n));
  const int threads = std::max(1, options.threads);
  if (threads == 1) {
    for (int64_t i = 0; i < n; ++i) {
      const int cls = class_for_image(spec, weights, dataset, i, options.policy);
      per_image[static_cast<size_t>(i)] =
          profile_rows(spec, weights, layers, dataset.image(i), cls,
                       options.with_sde, options.sde_cap);
    }
  } else {
    // Per-image work is pure; slot writes keep the reduction order fixed.
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mu;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (int64_t i = t; i < n; i += threads) {
            const int cls = class_for_image(spec, weights, dataset, i, options.policy);
            per_image[static_cast<size_t>(i)] =
                profile_rows(spec, weights, layers, dataset.image(i), cls,
                             options.with_sde, options.sde_cap);
          }
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }

  EntropyProfile profile;
  profile.image_count = static_cast<uint64_t>(n);
  profile.fingerprint = spec_fingerprint(spec);
  profile.class_policy = options.policy.describe();
  for (size_t r = 0; r < layers.size(); ++r) {
    double h0 = 0.0, ame = 0.0, sde = 0.0;
    bool has_sde = true;
    for (int64_t i = 0; i < n; ++i) {  // ascending index order
      const ImageRow& row = per_image[static_cast<size_t>(i)][r];
      h0 += row.h0;
      ame += row.ame;
      sde += row.sde;
      has_sde = has_sde && row.has_sde;
    }
    ProfileRow out;
    out.layer_name = layers[r].name;
    out.layer_index = layers[r].index;
    out.mean_h0 = h0 / static_cast<double>(n);
    out.mean_ame = ame / static_cast<double>(n);
    if (has_sde) out.mean_sde = sde / static_cast<double>(n);
    profile.rows.push_back(std::move(out));
  }
  return profile;
}

std::vector<SuperizationEvent> superization_events(const EntropyProfile& profile,
                                                   double flat_threshold) {
  if (profile.rows.size() < 2) fail("profile needs at least 2 rows");
  std::vector<SuperizationEvent> events;
  events.reserve(profile.rows.size() - 1);
  for (size_t i = 1; i < profile.rows.size(); ++i) {
    SuperizationEvent e;
    e.layer_name = profile.rows[i].layer_name;
    e.delta_ame = profile.rows[i].mean_ame - profile.rows[i - 1].mean_ame;
    if (std::abs(e.delta_ame) <= flat_threshold) {
      e.kind = EventKind::flat;
    } else {
      e.kind = e.delta_ame < 0.0 ? EventKind::drop : EventKind::rise;
    }
    events.push_back(std::move(e));
  }
  return events;
}

std::vector<uint8_t> render_heatmap(const GrayMap& map,
                                    const HeatmapPalette& palette,
                                    int scale_factor) {
  if (scale_factor < 1) fail("scale factor must be >= 1");
  RgbMap rgb(map.width * scale_factor, map.height * scale_factor);
  for (int y = 0; y < rgb.height; ++y) {
    const int sy = y / scale_factor;
    for (int x = 0; x < rgb.width; ++x) {
      const auto& color = palette[map.at(sy, x / scale_factor)];
      uint8_t* dst = rgb.pixels.data() + (static_cast<size_t>(y) * rgb.width + x) * 3;
      dst[0] = color[0];
      dst[1] = color[1];
      dst[2] = color[2];
    }
  }
  return write_image(rgb);
}

std::string write_profile_csv(const EntropyProfile& profile) {
  std::string out = "layer,index,h0_bits,ame,sde,images\n";
  for (const auto& row : profile.rows) {
    out += row.layer_name;
    out += ',' + std::to_string(row.layer_index);
    out += ',' + format6(row.mean_h0);
    out += ',' + format6(row.mean_ame);
    out += ',';
    if (row.mean_sde) out += format6(*row.mean_sde);
    out += ',' + std::to_string(profile.image_count);
    out += '\n';
  }
  return out;
}

std::string profile_to_json(const EntropyProfile& profile) {
  json rows = json::array();
  for (const auto& row : profile.rows) {
    json jr{{"layer", row.layer_name},
            {"index", row.layer_index},
            {"h0_bits", row.mean_h0},
            {"ame", row.mean_ame}};
    jr["sde"] = row.mean_sde ? json(*row.mean_sde) : json(nullptr);
    rows.push_back(std::move(jr));
  }
  json j{{"fingerprint", profile.fingerprint},
         {"class_policy", profile.class_policy},
         {"image_count", profile.image_count},
         {"rows", rows}};
  return j.dump(2) + "\n";
}

}  // namespace salent
