#pragma once

#include <cstdint>

#include "s2d/image.hpp"

namespace s2d {

/// Per-pixel superpixel labels in [0, count). Each label is one 4-connected region.
struct SuperpixelLabels {
  Image<std::int32_t> labels;
  int count = 0;

  int width() const { return labels.width(); }
  int height() const { return labels.height(); }
  std::int32_t operator()(int u, int v) const { return labels(u, v); }
  std::int32_t operator[](std::size_t i) const { return labels[i]; }
};

struct SuperpixelParams {
  int region_size = 16;      ///< target superpixel edge length (pixels)
  double compactness = 10.0; ///< weight of spatial vs CIELAB distance
  int iterations = 10;

  void validate() const;
};

/// SLIC: k-means over (L, a, b, u, v) from a regular grid of seeds (nudged to the lowest local
/// gradient), followed by connectivity enforcement. Fragments smaller than a quarter of the target
/// area are merged into the adjacent region with the closest mean color. Labels are numbered in
/// raster order of first appearance. Deterministic.
SuperpixelLabels superpixel_segment(const ColorImage& image, const SuperpixelParams& params = {});

/// Converts one sRGB pixel to CIELAB (D65 white).
Eigen::Vector3d rgb_to_lab(Rgb c);

}  // namespace s2d
