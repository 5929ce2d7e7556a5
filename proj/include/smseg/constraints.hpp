#pragma once

#include <optional>

#include "smseg/types.hpp"

namespace smseg {

// Below this sine of the angle between a ray and the epipole the epipolar
// plane normal is numerically undefined and every plane-based constraint is
// reported not-applicable.
inline constexpr double k_epipole_degeneracy = 1e-9;

// Rejection bands: deviations inside them are clamped to zero so that
// triangulation noise on truly static structure cannot fire a constraint.
struct ConstraintThresholds {
  double lambda_height = 1e-3;        // below-road arc, sine units
  double lambda_antiparallel = 1e-3;  // above-road excess arc, sine units
  double lambda_static = 0.02;        // road displacement under a static camera, m
};

// Epipolar plane of a previous-frame ray: spanned by the ray direction
// (rotated into the current frame) and the epipole. When the ray is parallel
// to the epipole the plane is undefined and the frame is degenerate.
struct EpipolarFrame {
  bool degenerate = true;
  Vec3 normal = Vec3::Zero();  // unit normal, zero when degenerate
};

EpipolarFrame make_epipolar_frame(const UnitVec3& p_prev, const UnitVec3& epipole);

// Sine of the out-of-plane angle of the current ray, in [0, 1]. Zero for any
// correspondence consistent with the epipolar plane.
std::optional<double> epipolar_deviation(const EpipolarFrame& frame, const UnitVec3& p_cur);

// Same residual as a geodesic arc length on the sphere, in [0, pi/2].
std::optional<double> geodesic_epipolar_deviation(const EpipolarFrame& frame, const UnitVec3& p_cur);

// Normalized projection of a direction onto the plane through the origin
// with the given unit normal. Throws std::domain_error when the direction is
// parallel to the normal within k_epipole_degeneracy.
UnitVec3 project_to_plane(const UnitVec3& v, const Vec3& unit_normal);

// Sine of the arc by which the in-plane current ray leaves the valid
// great-circle segment between the epipole (range zero) and the previous ray
// (range infinity). Zero when the rays converge in front of both cameras;
// positive both for an overshoot past the previous ray and for a ray that
// crossed to the far side of the epipole.
double positive_depth_deviation(const UnitVec3& p_prev, const UnitVec3& p_cur_in_plane,
                                const UnitVec3& epipole, const Vec3& plane_normal);

// Closest-approach midpoint of two rays, with the signed ray parameters of
// the two closest points. Not converged when the rays are parallel within
// 1e-12.
struct MidpointResult {
  bool converged = false;
  double s_prev = 0.0;
  double s_cur = 0.0;
  Vec3 point = Vec3::Zero();
};

MidpointResult midpoint_triangulate(const Vec3& center_prev, const UnitVec3& dir_prev,
                                    const Vec3& center_cur, const UnitVec3& dir_cur);

// Distance along a ray from a camera at `camera_height` above the road to
// the road plane; empty for rays at or above the horizon.
std::optional<double> road_scale(const UnitVec3& ray, const UnitVec3& horizon, double camera_height);

// Current-frame direction of the previous ray's road intersection:
// normalize(scale * p_prev + translation), where translation carries the
// previous optical center in current coordinates.
UnitVec3 road_reprojection(const UnitVec3& p_prev, double scale, const Vec3& translation);

// Road-geometry residuals of one correspondence whose rays both point below
// the horizon. Exactly one of the two can be positive:
//   height       — observed sweep stops short of the road prediction: less
//                  parallax than the road surface, so the apparent
//                  intersection lies beyond it, below the road;
//   antiparallel — observed sweep overshoots the road prediction: more
//                  parallax than the road surface, an apparent point
//                  floating above the road, nearer than the surface.
struct RoadDeviations {
  double height = 0.0;
  double antiparallel = 0.0;
};

RoadDeviations road_deviations(const UnitVec3& p_prev, const UnitVec3& p_cur_in_plane,
                               const UnitVec3& p_road, const Vec3& plane_normal,
                               const ConstraintThresholds& thresholds);

// Rays of one scene point in three consecutive views, all expressed in the
// middle view's camera frame. translation_prev_mid is the first optical
// center minus the middle one; translation_mid_next is the middle center
// minus the last one. Both baselines must be above the motion floor.
struct ThreeViewObservation {
  UnitVec3 ray_prev;
  UnitVec3 ray_mid;
  UnitVec3 ray_next;
  Vec3 translation_prev_mid;
  Vec3 translation_mid_next;
};

// Sine of the angle by which the first-pair triangulation disagrees with the
// depth transported from the second pair, in [0, 1]. Empty when the
// construction is degenerate (rays parallel to a baseline, collapsed
// triangle).
std::optional<double> three_view_deviation(const ThreeViewObservation& obs);

// Residual for frame pairs whose baseline is under the motion floor: the
// sine of the angle between the rotation-compensated rays, except that pairs
// explainable as static road surface (road intersections closer than
// lambda_static) are clamped to zero.
double static_degenerate_deviation(const UnitVec3& p_prev, const UnitVec3& p_cur,
                                   const UnitVec3& horizon, double camera_height,
                                   double lambda_static);

// Per-correspondence deviations; a component without a defined value for
// this geometry (degenerate epipolar frame, rays above the horizon, missing
// third view) stays empty and is skipped by fusion.
struct ConstraintDeviations {
  std::optional<double> epipolar;
  std::optional<double> depth;
  std::optional<double> height;
  std::optional<double> antiparallel;
  std::optional<double> three_view;
};

// Evaluates every two-view constraint of one correspondence against a
// non-degenerate frame-pair geometry. `p_prev` must already be rotated into
// the current frame.
ConstraintDeviations evaluate_correspondence(const UnitVec3& p_prev, const UnitVec3& p_cur,
                                             const UnitVec3& epipole, const Vec3& translation,
                                             const UnitVec3& horizon, double camera_height,
                                             const ConstraintThresholds& thresholds);

}  // namespace smseg
