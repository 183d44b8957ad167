#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "salent/engine.hpp"
#include "salent/net.hpp"
#include "salent/tensor.hpp"

namespace salent {

/// Which class the saliency maps target when profiling a dataset.
struct ClassPolicy {
  enum class Mode { label, argmax, fixed };
  Mode mode = Mode::label;
  int fixed_class = 0;

  static ClassPolicy label() { return {Mode::label, 0}; }
  static ClassPolicy argmax() { return {Mode::argmax, 0}; }
  static ClassPolicy fixed(int c) { return {Mode::fixed, c}; }
  static ClassPolicy parse(const std::string& text);
  std::string describe() const;
};

struct ProfileRow {
  std::string layer_name;
  int layer_index = 0;  // position in spec.layers
  double mean_h0 = 0.0;
  double mean_ame = 0.0;
  std::optional<double> mean_sde;
};

/// Per-layer mean entropies of the saliency maps over a dataset; one row
/// per spatial layer, in network order.
struct EntropyProfile {
  std::vector<ProfileRow> rows;
  uint64_t image_count = 0;
  std::string fingerprint;   // spec hash
  std::string class_policy;
};

enum class EventKind { drop, rise, flat };
const char* to_string(EventKind kind);

/// Entropy change arriving at a layer: mean AME minus the previous
/// profiled row's.
struct SuperizationEvent {
  std::string layer_name;
  double delta_ame = 0.0;
  EventKind kind = EventKind::flat;
};

struct LayerEntropy {
  std::string layer_name;
  double h0 = 0.0;
  double ame = 0.0;
};

/// Saliency entropies of every spatial layer for one image.
std::vector<LayerEntropy> layer_profile(const NetworkSpec& spec,
                                        const Weights& weights,
                                        const Tensor& image, int class_index);

struct ProfileOptions {
  ClassPolicy policy = ClassPolicy::label();
  bool with_sde = false;
  int sde_cap = 64;
  int threads = 1;
};

/// Arithmetic mean of per-image entropies; images reduced in ascending
/// index order regardless of thread count.
EntropyProfile dataset_profile(const NetworkSpec& spec, const Weights& weights,
                               const Dataset& dataset,
                               const ProfileOptions& options = {});

/// Deltas between consecutive profile rows, classified by sign against
/// flat_threshold (|delta| <= threshold is flat).
std::vector<SuperizationEvent> superization_events(const EntropyProfile& profile,
                                                   double flat_threshold);

using HeatmapPalette = std::array<std::array<uint8_t, 3>, 256>;

/// Piecewise-linear purple-magenta-orange-yellow ramp.
const HeatmapPalette& plasma_palette();
/// Identity ramp: intensity g maps to (g,g,g).
const HeatmapPalette& grayscale_palette();
const HeatmapPalette& palette_by_name(const std::string& name);

/// Palette lookup plus nearest-neighbor upscale, emitted as PPM bytes.
std::vector<uint8_t> render_heatmap(const GrayMap& map,
                                    const HeatmapPalette& palette,
                                    int scale_factor);

/// "layer,index,h0_bits,ame,sde,images" header plus one row per layer;
/// floats printed with six decimals, absent SDE as an empty field.
std::string write_profile_csv(const EntropyProfile& profile);

std::string profile_to_json(const EntropyProfile& profile);

}  // namespace salent
