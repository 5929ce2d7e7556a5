#include "smseg/oracle.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace smseg {

OracleLabel oracle_classify(const UnitVec3& ray_prev, const UnitVec3& ray_cur,
                            const FramePairGeometry& geometry, const UnitVec3& horizon,
                            double camera_height, const ConstraintThresholds& thresholds,
                            double epipolar_tolerance) {
  if (geometry.degenerate) {
    throw std::invalid_argument("oracle_classify: degenerate frame-pair geometry");
  }
  const Vec3 center_prev = geometry.translation;  // current camera sits at the origin

  const Vec3 plane = ray_prev.cross(center_prev);
  const double plane_len = plane.norm();
  if (plane_len < 1e-9) {
    throw std::invalid_argument("oracle_classify: previous ray parallel to the baseline");
  }
  const Vec3 n = plane / plane_len;

  if (std::abs(n.dot(ray_cur.vec())) > epipolar_tolerance) {
    return OracleLabel::epipolar_violating;
  }

  // Work with the reconstructable in-plane part of the current ray.
  const Vec3 cur_in_plane = (ray_cur.vec() - n.dot(ray_cur.vec()) * n).normalized();

  if (ray_prev.cross(cur_in_plane).norm() < 1e-12) return OracleLabel::parallel_rays;

  // Least-squares intersection of the two lines, solved as the normal
  // equations of [p, -q] [s_prev, s_cur]^T = -center_prev.
  Eigen::Matrix2d ata;
  ata << 1.0, -ray_prev.dot(cur_in_plane), -ray_prev.dot(cur_in_plane), 1.0;
  Eigen::Vector2d atb(-ray_prev.dot(center_prev), cur_in_plane.dot(center_prev));
  const Eigen::Vector2d params = ata.colPivHouseholderQr().solve(atb);
  const double s_prev = params[0];
  const double s_cur = params[1];
  if (s_prev <= 0.0 || s_cur <= 0.0) return OracleLabel::behind_convergence;

  const Vec3 point = 0.5 * ((center_prev + s_prev * ray_prev.vec()) + s_cur * cur_in_plane);

  if (ray_prev.dot(horizon) > 0.0 && ray_cur.dot(horizon) > 0.0) {
    // Road intersection of the previous ray, as a position in space.
    const double to_road = (camera_height - center_prev.dot(horizon.vec())) / ray_prev.dot(horizon);
    const Vec3 road_point = center_prev + to_road * ray_prev.vec();
    const double gap = std::sin(angle_between(road_point, cur_in_plane));
    const double depth = point.dot(horizon.vec());
    if (depth > camera_height && gap > thresholds.lambda_height) return OracleLabel::below_road;
    if (depth < camera_height && gap > thresholds.lambda_antiparallel) {
      return OracleLabel::above_road_excess;
    }
  }
  return OracleLabel::static_consistent;
}

}  // namespace smseg
