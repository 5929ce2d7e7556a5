#pragma once

#include "smseg/constraints.hpp"
#include "smseg/odometry.hpp"
#include "smseg/types.hpp"

namespace smseg {

// Verdict of the brute-force 3D reconstruction of one correspondence, in
// decision order: the first matching label wins.
enum class OracleLabel {
  epipolar_violating,  // current ray measurably off the epipolar plane
  parallel_rays,       // in-plane rays parallel: no convergence information
  behind_convergence,  // rays meet behind at least one camera
  below_road,          // reconstructed point under the road surface
  above_road_excess,   // point floats above the road, nearer than the road allows
  static_consistent,
};

// Classifies a correspondence by explicit 3D reconstruction: intersect the
// rays as lines in space, inspect the signed ray parameters and compare the
// closest-approach midpoint against the road plane. Shares no spherical
// residual formulas with the constraint engine, so it can arbitrate them.
// The lambda bands of `thresholds` mute road verdicts inside the rejection
// bands; `epipolar_tolerance` plays the same role for the plane test.
// Requires a non-degenerate geometry and a previous ray not parallel to the
// baseline (throws std::invalid_argument otherwise).
OracleLabel oracle_classify(const UnitVec3& ray_prev, const UnitVec3& ray_cur,
                            const FramePairGeometry& geometry, const UnitVec3& horizon,
                            double camera_height, const ConstraintThresholds& thresholds,
                            double epipolar_tolerance = 1e-9);

}  // namespace smseg
