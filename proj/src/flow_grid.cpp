#include "smseg/flow_grid.hpp"

#include <algorithm>
#include <stdexcept>

namespace smseg {

void FlowGrid::cell_span(int cx, int cy, int* x0, int* y0, int* x1, int* y1) const {
  *x0 = cx * cell_size;
  *y0 = cy * cell_size;
  *x1 = std::min(*x0 + cell_size, image_width);
  *y1 = std::min(*y0 + cell_size, image_height);
}

Vec2 FlowGrid::cell_center(int cx, int cy) const {
  int x0, y0, x1, y1;
  cell_span(cx, cy, &x0, &y0, &x1, &y1);
  return Vec2(0.5 * (x0 + x1 - 1), 0.5 * (y0 + y1 - 1));
}

FlowGrid average_flow(const FlowField& flow, int cell_size) {
  if (cell_size <= 0) throw std::invalid_argument("average_flow: cell_size must be positive");
  if (flow.width <= 0 || flow.height <= 0) throw std::invalid_argument("average_flow: empty flow field");

  FlowGrid g;
  g.cell_size = cell_size;
  g.image_width = flow.width;
  g.image_height = flow.height;
  g.cells_x = (flow.width + cell_size - 1) / cell_size;
  g.cells_y = (flow.height + cell_size - 1) / cell_size;
  g.valid.assign(static_cast<std::size_t>(g.cells_x) * g.cells_y, 0);
  g.mean.assign(static_cast<std::size_t>(g.cells_x) * g.cells_y, Vec2::Zero());

  for (int cy = 0; cy < g.cells_y; ++cy) {
    for (int cx = 0; cx < g.cells_x; ++cx) {
      int x0, y0, x1, y1;
      g.cell_span(cx, cy, &x0, &y0, &x1, &y1);
      const int covered = (x1 - x0) * (y1 - y0);
      int n = 0;
      double su = 0.0, sv = 0.0;
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          if (!flow.valid(x, y)) continue;
          const std::size_t i = flow.index(x, y);
          su += flow.du[i];
          sv += flow.dv[i];
          ++n;
        }
      }
      if (2 * n >= covered && n > 0) {
        g.valid[g.index(cx, cy)] = 1;
        g.mean[g.index(cx, cy)] = Vec2(su / n, sv / n);
      }
    }
  }
  return g;
}

}  // namespace smseg
