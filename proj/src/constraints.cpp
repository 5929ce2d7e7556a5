#include "smseg/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace smseg {

EpipolarFrame make_epipolar_frame(const UnitVec3& p_prev, const UnitVec3& epipole) {
  EpipolarFrame f;
  const Vec3 n = p_prev.cross(epipole);
  const double len = n.norm();
  if (len < k_epipole_degeneracy) return f;  // ray through the epipole
  f.degenerate = false;
  f.normal = n / len;
  return f;
}

std::optional<double> epipolar_deviation(const EpipolarFrame& frame, const UnitVec3& p_cur) {
  if (frame.degenerate) return std::nullopt;
  return std::min(std::abs(frame.normal.dot(p_cur.vec())), 1.0);
}

std::optional<double> geodesic_epipolar_deviation(const EpipolarFrame& frame, const UnitVec3& p_cur) {
  if (frame.degenerate) return std::nullopt;
  return std::asin(std::min(std::abs(frame.normal.dot(p_cur.vec())), 1.0));
}

UnitVec3 project_to_plane(const UnitVec3& v, const Vec3& unit_normal) {
  const Vec3 w = v.vec() - v.dot(unit_normal) * unit_normal;
  const double len = w.norm();
  if (len < k_epipole_degeneracy) {
    throw std::domain_error("project_to_plane: direction is parallel to the plane normal");
  }
  return UnitVec3::from_unit(w / len);
}

double positive_depth_deviation(const UnitVec3& p_prev, const UnitVec3& p_cur_in_plane,
                                const UnitVec3& epipole, const Vec3& plane_normal) {
  // A point in front of both cameras keeps the current ray on the
  // great-circle arc between the epipole (range zero) and the previous ray
  // (range infinity). The deviation is the sine of the arc by which the
  // current ray leaves that segment: past the previous ray the
  // reconstruction falls behind the current camera, past the epipole it
  // falls behind the previous one.
  const double past_prev = plane_normal.dot(p_cur_in_plane.cross(p_prev));
  const double past_epipole = plane_normal.dot(epipole.cross(p_cur_in_plane));
  const double deviation = std::max(past_prev, past_epipole);
  if (deviation <= 0.0) return 0.0;
  return std::min(deviation, 1.0);
}

MidpointResult midpoint_triangulate(const Vec3& center_prev, const UnitVec3& dir_prev,
                                    const Vec3& center_cur, const UnitVec3& dir_cur) {
  MidpointResult r;
  const double cross = dir_prev.cross(dir_cur).norm();
  if (cross < 1e-12) return r;  // parallel rays never converge
  const Vec3 w = center_prev - center_cur;
  const double b = dir_prev.dot(dir_cur);
  const double d = dir_prev.dot(w);
  const double e = dir_cur.dot(w);
  const double denom = 1.0 - b * b;
  r.converged = true;
  r.s_prev = (b * e - d) / denom;
  r.s_cur = (e - b * d) / denom;
  r.point = 0.5 * (center_prev + r.s_prev * dir_prev.vec() + center_cur + r.s_cur * dir_cur.vec());
  return r;
}

std::optional<double> road_scale(const UnitVec3& ray, const UnitVec3& horizon, double camera_height) {
  const double toward_road = ray.dot(horizon);
  if (toward_road <= 0.0) return std::nullopt;
  return camera_height / toward_road;
}

UnitVec3 road_reprojection(const UnitVec3& p_prev, double scale, const Vec3& translation) {
  return UnitVec3(scale * p_prev.vec() + translation);
}

RoadDeviations road_deviations(const UnitVec3& p_prev, const UnitVec3& p_cur_in_plane,
                               const UnitVec3& p_road, const Vec3& plane_normal,
                               const ConstraintThresholds& thresholds) {
  RoadDeviations out;

  // Signed arcs from the previous ray to the observed ray (alpha) and to the
  // road prediction (beta), measured about the plane normal.
  const double sin_alpha = plane_normal.dot(p_prev.cross(p_cur_in_plane));
  const double sin_beta = plane_normal.dot(p_prev.cross(p_road));
  if (sin_alpha * sin_beta <= 0.0) return out;  // opposite sweep directions

  const double alpha = std::atan2(sin_alpha, p_prev.dot(p_cur_in_plane));
  const double beta = std::atan2(sin_beta, p_prev.dot(p_road));
  const double gap = std::min(p_cur_in_plane.cross(p_road).norm(), 1.0);

  if (std::abs(alpha) < std::abs(beta)) {
    // Observed sweep stops short of the road prediction: less parallax than
    // the road surface, so the apparent point lies beyond it, below the road.
    out.height = std::max(0.0, gap - thresholds.lambda_height);
  } else if (std::abs(alpha) > std::abs(beta)) {
    // Observed sweep overshoots the road prediction: more parallax than the
    // road surface, an apparent point floating above the road, nearer than
    // the surface along this ray.
    out.antiparallel = std::max(0.0, gap - thresholds.lambda_antiparallel);
  }
  return out;
}

std::optional<double> three_view_deviation(const ThreeViewObservation& obs) {
  const Vec3& t01 = obs.translation_prev_mid;
  const Vec3& t12 = obs.translation_mid_next;
  if (t01.norm() < 1e-12 || t12.norm() < 1e-12) {
    throw std::invalid_argument("three_view_deviation: baseline under the motion floor");
  }

  // All angles live in the epipolar plane of the first pair; project the
  // second baseline and every ray onto it. Projected baselines keep their
  // (foreshortened) length, rays are renormalized to directions.
  const UnitVec3 epipole(t01);
  const EpipolarFrame frame = make_epipolar_frame(obs.ray_prev, epipole);
  if (frame.degenerate) return std::nullopt;
  const Vec3& n = frame.normal;

  const auto in_plane = [&n](const Vec3& v) { return Vec3(v - v.dot(n) * n); };
  const Vec3 p0 = in_plane(obs.ray_prev.vec());
  const Vec3 p1 = in_plane(obs.ray_mid.vec());
  const Vec3 p2 = in_plane(obs.ray_next.vec());
  const Vec3 t12p = in_plane(t12);
  const Vec3 t_total = in_plane(t01 + t12);
  if (p1.norm() < k_epipole_degeneracy || p2.norm() < k_epipole_degeneracy ||
      t12p.norm() < 1e-12) {
    return std::nullopt;
  }

  // Elevation of the triangulated point over each baseline: the angle the
  // ray rises from the baseline minus the angle at which it is seen from the
  // other end.
  const double theta01 = angle_between(p0, t01) - angle_between(p1, t01);
  const double theta12 = angle_between(p1, t12p) - angle_between(p2, t12p);
  const double sin_theta12 = std::sin(theta12);
  if (std::abs(sin_theta12) < 1e-9) return std::nullopt;

  // Law of sines in the second triangle gives the range from the last
  // camera; the law of cosines transports it across the total baseline back
  // to the first camera.
  const double interior_mid = angle_between(p1, -t12p);
  const double range_next = t12p.norm() * std::sin(interior_mid) / sin_theta12;
  const double interior_next = angle_between(p2, t_total);
  const double total_len = t_total.norm();
  const double range_sq = total_len * total_len + range_next * range_next -
                          2.0 * total_len * range_next * std::cos(interior_next);
  if (!(range_sq > 1e-24)) return std::nullopt;
  const double range_prev = std::sqrt(range_sq);

  const double sin_theta_total =
      std::clamp(std::sin(interior_next) * total_len / range_prev, -1.0, 1.0);
  const double theta_total = std::asin(sin_theta_total);

  return std::abs(std::sin(theta01 + theta12 - theta_total));
}

double static_degenerate_deviation(const UnitVec3& p_prev, const UnitVec3& p_cur,
                                   const UnitVec3& horizon, double camera_height,
                                   double lambda_static) {
  const double toward_prev = p_prev.dot(horizon);
  const double toward_cur = p_cur.dot(horizon);
  if (toward_prev > 0.0 && toward_cur > 0.0) {
    const Vec3 road_prev = (camera_height / toward_prev) * p_prev.vec();
    const Vec3 road_cur = (camera_height / toward_cur) * p_cur.vec();
    if ((road_cur - road_prev).norm() < lambda_static) return 0.0;
  }
  return std::min(p_cur.cross(p_prev).norm(), 1.0);
}

ConstraintDeviations evaluate_correspondence(const UnitVec3& p_prev, const UnitVec3& p_cur,
                                             const UnitVec3& epipole, const Vec3& translation,
                                             const UnitVec3& horizon, double camera_height,
                                             const ConstraintThresholds& thresholds) {
  ConstraintDeviations out;

  const EpipolarFrame frame = make_epipolar_frame(p_prev, epipole);
  if (frame.degenerate) return out;  // ray looks at the epipole: nothing is decidable
  out.epipolar = epipolar_deviation(frame, p_cur);

  const Vec3 w = p_cur.vec() - p_cur.dot(frame.normal) * frame.normal;
  const double wlen = w.norm();
  if (wlen < k_epipole_degeneracy) return out;  // current ray orthogonal to the plane
  const UnitVec3 p_cur_in_plane = UnitVec3::from_unit(w / wlen);

  out.depth = positive_depth_deviation(p_prev, p_cur_in_plane, epipole, frame.normal);

  if (p_prev.dot(horizon) > 0.0 && p_cur.dot(horizon) > 0.0) {
    const auto scale = road_scale(p_prev, horizon, camera_height);
    const Vec3 road_vec = *scale * p_prev.vec() + translation;
    if (road_vec.norm() >= 1e-12) {
      const UnitVec3 p_road = project_to_plane(UnitVec3(road_vec), frame.normal);
      const RoadDeviations rd =
          road_deviations(p_prev, p_cur_in_plane, p_road, frame.normal, thresholds);
      out.height = rd.height;
      out.antiparallel = rd.antiparallel;
    }
  }
  return out;
}

}  // namespace smseg
