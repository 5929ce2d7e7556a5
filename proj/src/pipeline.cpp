#include "smseg/pipeline.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace smseg {

std::vector<SphericalCorrespondence> lift_correspondences(const FlowGrid& grid,
                                                          const FisheyeCalibration& calib,
                                                          const Mat3& rotation_prev_to_cur,
                                                          LiftStats* stats) {
  std::vector<SphericalCorrespondence> out;
  out.reserve(grid.valid.size());
  LiftStats local;
  for (int cy = 0; cy < grid.cells_y; ++cy) {
    for (int cx = 0; cx < grid.cells_x; ++cx) {
      const std::size_t i = grid.index(cx, cy);
      if (!grid.valid[i]) continue;
      ++local.valid_cells;
      const Vec2 pixel_prev = grid.cell_center(cx, cy);
      const Vec2 pixel_cur = pixel_prev + grid.mean[i];
      if (!calib.pixel_in_fov(pixel_prev) || !calib.pixel_in_fov(pixel_cur)) {
        ++local.dropped_fov;
        continue;
      }
      const UnitVec3 ray_prev(rotation_prev_to_cur * calib.unproject(pixel_prev).vec());
      out.emplace_back(ray_prev, calib.unproject(pixel_cur), static_cast<int>(i));
      ++local.lifted;
    }
  }
  if (stats) *stats = local;
  return out;
}

namespace {

struct CellKernel {
  const FramePairGeometry& geometry;
  UnitVec3 horizon;
  double camera_height;
  const PipelineParams& params;

  // One correspondence -> deviations + fused likelihood. Pure; called from
  // both execution paths so they cannot diverge arithmetically.
  void operator()(const SphericalCorrespondence& c, ConstraintDeviations* dev, double* fused,
                  std::uint8_t* applicable) const {
    if (geometry.degenerate) {
      *dev = ConstraintDeviations{};
      *fused = static_degenerate_deviation(c.ray_prev, c.ray_cur, horizon, camera_height,
                                           params.thresholds.lambda_static);
      *applicable = 1;
      return;
    }
    *dev = evaluate_correspondence(c.ray_prev, c.ray_cur, *geometry.epipole, geometry.translation,
                                   horizon, camera_height, params.thresholds);
    const auto xi = fuse(*dev, params.weights);
    *fused = xi.value_or(0.0);
    *applicable = xi.has_value() ? 1 : 0;
  }
};

}  // namespace

PairEvaluation evaluate_pair(const FlowGrid& grid, const FisheyeCalibration& calib,
                             const FramePairGeometry& geometry, const PipelineParams& params,
                             Execution execution) {
  params.weights.validate();

  PairEvaluation ev;
  ev.degenerate = geometry.degenerate;
  ev.deviations.cells_x = grid.cells_x;
  ev.deviations.cells_y = grid.cells_y;
  ev.deviations.cells.assign(grid.valid.size(), ConstraintDeviations{});
  ev.deviations.has_data.assign(grid.valid.size(), 0);
  ev.likelihood.cells_x = grid.cells_x;
  ev.likelihood.cells_y = grid.cells_y;
  ev.likelihood.cell_size = grid.cell_size;
  ev.likelihood.image_width = grid.image_width;
  ev.likelihood.image_height = grid.image_height;
  ev.likelihood.value.assign(grid.valid.size(), 0.0);
  ev.likelihood.applicable.assign(grid.valid.size(), 0);

  const auto corrs = lift_correspondences(grid, calib, geometry.rotation, &ev.stats);
  const CellKernel kernel{geometry, calib.horizon_vector(), calib.camera_height, params};
  const std::int64_t n = static_cast<std::int64_t>(corrs.size());

  if (execution == Execution::parallel) {
#ifdef _OPENMP
    const int jobs = params.jobs > 0 ? params.jobs : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(jobs)
    for (std::int64_t i = 0; i < n; ++i) {
      const auto& c = corrs[static_cast<std::size_t>(i)];
      const std::size_t cell = static_cast<std::size_t>(c.cell_index);
      kernel(c, &ev.deviations.cells[cell], &ev.likelihood.value[cell],
             &ev.likelihood.applicable[cell]);
      ev.deviations.has_data[cell] = 1;
    }
    return ev;
#endif
  }

  for (std::int64_t i = 0; i < n; ++i) {
    const auto& c = corrs[static_cast<std::size_t>(i)];
    const std::size_t cell = static_cast<std::size_t>(c.cell_index);
    kernel(c, &ev.deviations.cells[cell], &ev.likelihood.value[cell],
           &ev.likelihood.applicable[cell]);
    ev.deviations.has_data[cell] = 1;
  }
  return ev;
}

}  // namespace smseg
