#pragma once

#include <optional>
#include <string>
#include <vector>

#include "smseg/constraints.hpp"
#include "smseg/io.hpp"

namespace smseg {

// Convex-combination weights of the fused motion likelihood. Components
// whose deviation is not applicable for a correspondence drop out of both
// the numerator and the normalizer.
struct FusionWeights {
  double epipolar = 1.0;
  double depth = 1.0;
  double height = 0.2;
  double antiparallel = 0.2;
  double three_view = 0.0;

  void validate() const;
};

// Weighted mean of the applicable deviations; empty when no applicable
// component carries positive weight.
std::optional<double> fuse(const ConstraintDeviations& deviations, const FusionWeights& weights);

// Fused motion likelihood per cell. `applicable` is 0 for cells without a
// valid correspondence or without any applicable constraint.
struct LikelihoodGrid {
  int cells_x = 0;
  int cells_y = 0;
  int cell_size = 0;
  int image_width = 0;
  int image_height = 0;
  std::vector<double> value;
  std::vector<std::uint8_t> applicable;

  std::size_t index(int cx, int cy) const { return static_cast<std::size_t>(cy) * cells_x + cx; }
};

struct SegmentationMask {
  int cells_x = 0;
  int cells_y = 0;
  int cell_size = 0;
  int image_width = 0;
  int image_height = 0;
  double threshold = 0.0;
  std::vector<std::uint8_t> moving;

  std::size_t index(int cx, int cy) const { return static_cast<std::size_t>(cy) * cells_x + cx; }
};

// Cells are moving when their likelihood strictly exceeds the threshold;
// cells without a likelihood stay static.
SegmentationMask segment(const LikelihoodGrid& grid, double threshold);

// Full-resolution renderings: every pixel of a cell takes the cell's value.
// The heatmap maps likelihood linearly so that `saturation` (and anything
// beyond) lands on 255; cells without a value render black.
ImageU8 render_heatmap(const LikelihoodGrid& grid, double saturation = 0.02);
ImageU8 render_mask(const SegmentationMask& mask);

// Per-cell likelihood as a float grid, NaN for cells without a value.
GridF32 likelihood_to_grid(const LikelihoodGrid& grid);

}  // namespace smseg
