#pragma once

#include <vector>

#include "smseg/constraints.hpp"
#include "smseg/fisheye_camera.hpp"
#include "smseg/flow_grid.hpp"
#include "smseg/fusion.hpp"
#include "smseg/odometry.hpp"

namespace smseg {

// One pooled flow cell lifted onto the unit sphere. The previous ray is
// already rotated into the current camera frame.
struct SphericalCorrespondence {
  UnitVec3 ray_prev;
  UnitVec3 ray_cur;
  int cell_index = 0;

  SphericalCorrespondence(const UnitVec3& prev, const UnitVec3& cur, int cell)
      : ray_prev(prev), ray_cur(cur), cell_index(cell) {}
};

struct LiftStats {
  int valid_cells = 0;   // cells with pooled flow
  int lifted = 0;        // correspondences produced
  int dropped_fov = 0;   // cells whose endpoints leave the lens field of view
};

std::vector<SphericalCorrespondence> lift_correspondences(const FlowGrid& grid,
                                                          const FisheyeCalibration& calib,
                                                          const Mat3& rotation_prev_to_cur,
                                                          LiftStats* stats);

struct PipelineParams {
  int cell_size = 5;
  double threshold = 6e-4;        // fused likelihood above which a cell is moving
  double motion_floor = 0.005;    // baseline under which a pair is degenerate, m
  double frame_rate = 15.0;       // frame index -> timestamp
  int jobs = 0;                   // OpenMP thread count, 0 = runtime default
  FusionWeights weights;
  ConstraintThresholds thresholds;
};

// Per-cell constraint deviations of one frame pair (empty for degenerate
// pairs, whose residual is a single value per cell).
struct DeviationGrid {
  int cells_x = 0;
  int cells_y = 0;
  std::vector<ConstraintDeviations> cells;
  std::vector<std::uint8_t> has_data;

  std::size_t index(int cx, int cy) const { return static_cast<std::size_t>(cy) * cells_x + cx; }
};

struct PairEvaluation {
  bool degenerate = false;
  LiftStats stats;
  DeviationGrid deviations;   // empty when degenerate
  LikelihoodGrid likelihood;  // fused, or the degenerate residual
};

enum class Execution { serial, parallel };

// Evaluates every lifted correspondence of one frame pair and fuses the
// per-cell likelihood. The serial path is the reference implementation; the
// parallel path distributes cells over OpenMP threads and must produce
// bit-identical results for any thread count, since every cell is
// independent and written exactly once.
PairEvaluation evaluate_pair(const FlowGrid& grid, const FisheyeCalibration& calib,
                             const FramePairGeometry& geometry, const PipelineParams& params,
                             Execution execution);

}  // namespace smseg
