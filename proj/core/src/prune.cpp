#include "salent/prune.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

namespace salent {

using nlohmann::json;

namespace {
[[noreturn]] void fail(const std::string& what) {
  throw std::runtime_error("prune: " + what);
}

// Position of `layer_index` among the conv layers, or -1.
int conv_ordinal(const NetworkSpec& spec, int layer_index) {
  int ordinal = -1;
  for (int i = 0; i <= layer_index; ++i) {
    if (spec.layers[static_cast<size_t>(i)].kind == LayerKind::conv) ++ordinal;
  }
  return spec.layers[static_cast<size_t>(layer_index)].kind == LayerKind::conv
             ? ordinal
             : -1;
}

Dataset head_of(const Dataset& ds, int64_t limit) {
  if (limit <= 0 || limit >= ds.count()) return ds;
  const int64_t pixels = ds.images.size() / ds.count();
  std::vector<float> data(ds.images.data(), ds.images.data() + limit * pixels);
  Dataset out;
  out.images = Tensor({limit, ds.images.dim(1), ds.images.dim(2), ds.images.dim(3)},
                      std::move(data));
  out.labels.assign(ds.labels.begin(), ds.labels.begin() + limit);
  return out;
}
}  // namespace

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::tolerance_exceeded: return "tolerance_exceeded";
    case StopReason::no_candidate: return "no_candidate";
    case StopReason::max_removals: return "max_removals";
  }
  return "?";
}

std::optional<std::string> select_removal_candidate(const EntropyProfile& profile,
                                                    const NetworkSpec& spec,
                                                    const PruneConfig& config) {
  if (profile.fingerprint != spec_fingerprint(spec)) {
    fail("profile fingerprint does not match the spec");
  }
  std::optional<std::string> candidate;
  for (size_t r = 1; r < profile.rows.size(); ++r) {
    const ProfileRow& row = profile.rows[r];
    const int idx = spec.layer_index(row.layer_name);
    if (idx < 0) fail("profile row '" + row.layer_name + "' is not in the spec");
    if (spec.layers[static_cast<size_t>(idx)].kind != LayerKind::conv) continue;
    if (conv_ordinal(spec, idx) < config.protected_prefix) continue;
    const double delta = row.mean_ame - profile.rows[r - 1].mean_ame;
    if (delta >= -config.flat_threshold) candidate = row.layer_name;  // deepest wins
  }
  return candidate;
}

NetworkSpec remove_layer(const NetworkSpec& spec, const std::string& layer_name) {
  const int idx = spec.layer_index(layer_name);
  if (idx < 0) fail("unknown layer '" + layer_name + "'");
  const size_t pos = static_cast<size_t>(idx);
  if (spec.layers[pos].kind != LayerKind::conv) {
    fail("layer '" + layer_name + "' is not a conv layer");
  }

  NetworkSpec out = spec;
  const int in_channels = out.layers[pos].in_channels;
  size_t erase_count = 1;
  if (pos + 1 < out.layers.size() && out.layers[pos + 1].kind == LayerKind::relu) {
    erase_count = 2;  // conv and its relu go together
  }
  out.layers.erase(out.layers.begin() + static_cast<std::ptrdiff_t>(pos),
                   out.layers.begin() + static_cast<std::ptrdiff_t>(pos + erase_count));

  // Re-chain the next conv to the removed layer's input channels.
  for (size_t i = pos; i < out.layers.size(); ++i) {
    if (out.layers[i].kind == LayerKind::conv) {
      out.layers[i].in_channels = in_channels;
      break;
    }
    if (out.layers[i].kind == LayerKind::linear || out.layers[i].kind == LayerKind::flatten) {
      break;
    }
  }

  // The first linear behind the flatten absorbs any feature-count change.
  try {
    infer_shapes(out);
  } catch (const std::exception&) {
    int features = out.input_shape[0] * out.input_shape[1] * out.input_shape[2];
    int c = out.input_shape[0], h = out.input_shape[1], w = out.input_shape[2];
    bool flat = false;
    for (auto& layer : out.layers) {
      switch (layer.kind) {
        case LayerKind::conv: {
          if (flat || layer.in_channels != c) fail("removal breaks the layer chain");
          const int oh = (h + 2 * layer.padding - layer.kernel) / layer.stride + 1;
          const int ow = (w + 2 * layer.padding - layer.kernel) / layer.stride + 1;
          if (oh < 1 || ow < 1) fail("removal breaks the layer chain");
          c = layer.out_channels;
          h = oh;
          w = ow;
          features = c * h * w;
          break;
        }
        case LayerKind::maxpool: {
          if (flat) fail("removal breaks the layer chain");
          h = (h - layer.kernel) / layer.stride + 1;
          w = (w - layer.kernel) / layer.stride + 1;
          if (h < 1 || w < 1) fail("removal breaks the layer chain");
          features = c * h * w;
          break;
        }
        case LayerKind::flatten:
          flat = true;
          break;
        case LayerKind::linear:
          if (!flat) fail("removal breaks the layer chain");
          if (layer.in_features != features) layer.in_features = features;
          features = layer.out_features;
          flat = true;
          break;
        case LayerKind::relu:
          break;
      }
      if (layer.kind == LayerKind::linear) break;  // only the first linear is re-sized
    }
    infer_shapes(out);  // must hold now
  }
  return out;
}

PruneReport greedy_prune(const NetworkSpec& spec, const Dataset& train_set,
                         const Dataset& test_set, const PruneConfig& config) {
  if (config.accuracy_tolerance <= 0.0 || config.accuracy_tolerance >= 1.0) {
    fail("accuracy tolerance must be in (0,1)");
  }
  if (config.protected_prefix < 0) fail("protected prefix must be >= 0");

  PruneReport report;
  NetworkSpec current = spec;

  TrainResult trained = train(current, train_set, test_set, config.train);
  report.baseline_accuracy = evaluate(current, trained.weights, test_set);
  double accuracy_before = report.baseline_accuracy;
  const Dataset profile_set = head_of(test_set, config.profile_images);

  report.stop_reason = StopReason::max_removals;
  for (int round = 1; round <= config.max_removals; ++round) {
    ProfileOptions options = config.profile;
    EntropyProfile profile =
        dataset_profile(current, trained.weights, profile_set, options);
    const auto candidate = select_removal_candidate(profile, current, config);
    if (!candidate) {
      report.stop_reason = StopReason::no_candidate;
      break;
    }

    NetworkSpec next = remove_layer(current, *candidate);
    TrainResult retrained = train(next, train_set, test_set, config.train);
    const double accuracy_after = evaluate(next, retrained.weights, test_set);

    PruneIteration iter;
    iter.round = round;
    iter.removed_layer = *candidate;
    iter.accuracy_before = accuracy_before;
    iter.accuracy_after = accuracy_after;
    iter.profile = std::move(profile);
    iter.spec_after = next;
    report.iterations.push_back(std::move(iter));

    if (accuracy_after < report.baseline_accuracy - config.accuracy_tolerance) {
      report.stop_reason = StopReason::tolerance_exceeded;  // roll back
      break;
    }
    current = std::move(next);
    trained = std::move(retrained);
    accuracy_before = accuracy_after;
  }

  report.final_spec = current;
  return report;
}

namespace {
json iteration_to_json(const PruneIteration& iter) {
  return json{{"round", iter.round},
              {"removed_layer", iter.removed_layer},
              {"accuracy_before", iter.accuracy_before},
              {"accuracy_after", iter.accuracy_after},
              {"profile", json::parse(profile_to_json(iter.profile))},
              {"spec_after", json::parse(spec_to_json(iter.spec_after))}};
}
}  // namespace

std::string report_to_json(const PruneReport& report) {
  json iterations = json::array();
  for (const auto& iter : report.iterations) {
    iterations.push_back(iteration_to_json(iter));
  }
  json j{{"baseline_accuracy", report.baseline_accuracy},
         {"stop_reason", to_string(report.stop_reason)},
         {"iterations", iterations},
         {"final_spec", json::parse(spec_to_json(report.final_spec))}};
  return j.dump(2) + "\n";
}

}  // namespace salent
