#include "salent/profiler.hpp"

namespace salent {

namespace {

// Anchor colors of the purple-magenta-orange-yellow ramp, placed at
// i = 0, 255/4*... four equal segments. Integer interpolation keeps the
// table identical on every platform.
constexpr int kAnchors[5][3] = {
    {13, 8, 135},    // deep purple
    {126, 3, 168},   // magenta
    {204, 71, 120},  // pink-orange
    {248, 149, 64},  // orange
    {240, 249, 33},  // yellow
};

HeatmapPalette build_plasma() {
  HeatmapPalette pal{};
  for (int i = 0; i < 256; ++i) {
    int seg = i * 4 / 255;
    if (seg > 3) seg = 3;
    const int num = i * 4 - 255 * seg;  // position inside the segment, /255
    for (int ch = 0; ch < 3; ++ch) {
      const int c0 = kAnchors[seg][ch];
      const int c1 = kAnchors[seg + 1][ch];
      const int delta = c1 - c0;
      // round-half-away-from-zero of c0 + delta*num/255
      const int scaled = delta * num;
      const int rounded = scaled >= 0 ? (scaled + 127) / 255 : -((-scaled + 127) / 255);
      pal[static_cast<size_t>(i)][static_cast<size_t>(ch)] =
          static_cast<uint8_t>(c0 + rounded);
    }
  }
  return pal;
}

HeatmapPalette build_grayscale() {
  HeatmapPalette pal{};
  for (int i = 0; i < 256; ++i) {
    pal[static_cast<size_t>(i)] = {static_cast<uint8_t>(i), static_cast<uint8_t>(i),
                                   static_cast<uint8_t>(i)};
  }
  return pal;
}

}  // namespace

const HeatmapPalette& plasma_palette() {
  static const HeatmapPalette pal = build_plasma();
  return pal;
}

const HeatmapPalette& grayscale_palette() {
  static const HeatmapPalette pal = build_grayscale();
  return pal;
}

const HeatmapPalette& palette_by_name(const std::string& name) {
  if (name == "plasma") return plasma_palette();
  if (name == "gray" || name == "grayscale") return grayscale_palette();
  throw std::runtime_error("unknown palette '" + name + "' (choose plasma or gray)");
}

}  // namespace salent
