#include "smseg/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace smseg {

void FusionWeights::validate() const {
  const double all[] = {epipolar, depth, height, antiparallel, three_view};
  double sum = 0.0;
  for (double w : all) {
    if (!std::isfinite(w) || w < 0.0) {
      throw std::runtime_error("fusion weights must be finite and non-negative");
    }
    sum += w;
  }
  if (!(sum > 0.0)) throw std::runtime_error("at least one fusion weight must be positive");
}

std::optional<double> fuse(const ConstraintDeviations& deviations, const FusionWeights& weights) {
  double num = 0.0, den = 0.0;
  const auto add = [&num, &den](const std::optional<double>& xi, double w) {
    if (xi && w > 0.0) {
      num += w * *xi;
      den += w;
    }
  };
  add(deviations.epipolar, weights.epipolar);
  add(deviations.depth, weights.depth);
  add(deviations.height, weights.height);
  add(deviations.antiparallel, weights.antiparallel);
  add(deviations.three_view, weights.three_view);
  if (den <= 0.0) return std::nullopt;
  return num / den;
}

SegmentationMask segment(const LikelihoodGrid& grid, double threshold) {
  SegmentationMask m;
  m.cells_x = grid.cells_x;
  m.cells_y = grid.cells_y;
  m.cell_size = grid.cell_size;
  m.image_width = grid.image_width;
  m.image_height = grid.image_height;
  m.threshold = threshold;
  m.moving.assign(grid.value.size(), 0);
  for (std::size_t i = 0; i < grid.value.size(); ++i) {
    m.moving[i] = grid.applicable[i] && grid.value[i] > threshold ? 1 : 0;
  }
  return m;
}

namespace {

// Paints the pixel span of every cell with a per-cell byte.
template <typename ValueOf>
ImageU8 paint_cells(int cells_x, int cells_y, int cell_size, int width, int height, ValueOf value_of) {
  ImageU8 img;
  img.width = width;
  img.height = height;
  img.pixels.assign(static_cast<std::size_t>(width) * height, 0);
  for (int cy = 0; cy < cells_y; ++cy) {
    for (int cx = 0; cx < cells_x; ++cx) {
      const std::uint8_t v = value_of(cx, cy);
      const int x0 = cx * cell_size, y0 = cy * cell_size;
      const int x1 = std::min(x0 + cell_size, width), y1 = std::min(y0 + cell_size, height);
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) img.pixels[img.index(x, y)] = v;
      }
    }
  }
  return img;
}

}  // namespace

ImageU8 render_heatmap(const LikelihoodGrid& grid, double saturation) {
  if (!(saturation > 0.0)) throw std::invalid_argument("render_heatmap: saturation must be positive");
  return paint_cells(grid.cells_x, grid.cells_y, grid.cell_size, grid.image_width, grid.image_height,
                     [&grid, saturation](int cx, int cy) -> std::uint8_t {
                       const std::size_t i = grid.index(cx, cy);
                       if (!grid.applicable[i]) return 0;
                       const long v = std::lround(grid.value[i] / saturation * 255.0);
                       return static_cast<std::uint8_t>(std::clamp(v, 0L, 255L));
                     });
}

ImageU8 render_mask(const SegmentationMask& mask) {
  return paint_cells(mask.cells_x, mask.cells_y, mask.cell_size, mask.image_width, mask.image_height,
                     [&mask](int cx, int cy) -> std::uint8_t {
                       return mask.moving[mask.index(cx, cy)] ? 255 : 0;
                     });
}

GridF32 likelihood_to_grid(const LikelihoodGrid& grid) {
  GridF32 g;
  g.width = grid.cells_x;
  g.height = grid.cells_y;
  g.values.resize(grid.value.size());
  for (std::size_t i = 0; i < grid.value.size(); ++i) {
    g.values[i] = grid.applicable[i] ? static_cast<float>(grid.value[i])
                                     : std::numeric_limits<float>::quiet_NaN();
  }
  return g;
}

}  // namespace smseg
