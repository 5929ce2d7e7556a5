#pragma once

#include <vector>

#include "smseg/io.hpp"
#include "smseg/types.hpp"

namespace smseg {

// Dense flow pooled over square pixel cells. A cell keeps the mean flow of
// its valid pixels and is itself valid only when at least half of the pixels
// it covers carry a measurement.
struct FlowGrid {
  int cell_size = 0;
  int cells_x = 0;
  int cells_y = 0;
  int image_width = 0;
  int image_height = 0;
  std::vector<std::uint8_t> valid;
  std::vector<Vec2> mean;  // mean (du, dv) of each valid cell

  std::size_t index(int cx, int cy) const { return static_cast<std::size_t>(cy) * cells_x + cx; }

  // Pixel span covered by a cell: [x0, x1) x [y0, y1). Border cells may be
  // narrower when the image size is not a multiple of the cell size.
  void cell_span(int cx, int cy, int* x0, int* y0, int* x1, int* y1) const;

  // Center of the covered pixel span in pixel-center coordinates.
  Vec2 cell_center(int cx, int cy) const;
};

FlowGrid average_flow(const FlowField& flow, int cell_size);

}  // namespace smseg
