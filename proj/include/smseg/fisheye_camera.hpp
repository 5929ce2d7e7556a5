#pragma once

#include <array>
#include <optional>
#include <string>

#include "smseg/types.hpp"

namespace smseg {

// Radially symmetric fisheye model. The image radius of a ray at polar angle
// theta from the optical axis is a quartic with no constant term,
//
//   r(theta) = c1*theta + c2*theta^2 + c3*theta^3 + c4*theta^4   [pixels]
//
// valid for theta in [0, theta_max]. The polynomial must be strictly
// increasing on that interval so that the inverse mapping is well defined.
// Camera axes: +z along the optical axis into the scene, +x right, +y down.
struct FisheyeCalibration {
  std::array<double, 4> coeffs{};  // c1..c4
  double theta_max = 0.0;          // half field of view, rad
  Vec2 principal_point = Vec2::Zero();
  int width = 0;
  int height = 0;

  // Orientation of the road frame (x forward, y left, z up) relative to the
  // camera: maps road-frame vectors into camera coordinates.
  Mat3 road_to_camera = Mat3::Identity();
  double camera_height = 0.0;  // optical center above the road plane, m

  double radius_of_angle(double theta) const;
  double radius_slope(double theta) const;

  // Inverse of radius_of_angle on [0, theta_max]: bracketed Newton iteration
  // with bisection fallback, converged to 1e-12 rad. Throws std::domain_error
  // for a radius beyond the field-of-view rim.
  double angle_of_radius(double radius) const;

  double rim_radius() const { return radius_of_angle(theta_max); }

  // Pixel -> direction on the unit sphere. Throws std::domain_error when the
  // pixel lies outside the rim.
  UnitVec3 unproject(const Vec2& pixel) const;

  // Scene direction (any nonzero vector in camera coordinates) -> pixel.
  // Throws std::domain_error when the direction is outside the field of view.
  Vec2 project(const Vec3& direction) const;
  std::optional<Vec2> try_project(const Vec3& direction) const;

  bool in_fov(const Vec3& direction) const;
  bool pixel_in_fov(const Vec2& pixel) const;
  bool in_image(const Vec2& pixel) const;  // pixel center inside the raster

  // Unit vector of the downward road normal expressed in camera coordinates;
  // rays p with p . horizon > 0 point below the horizon plane.
  UnitVec3 horizon_vector() const;

  // Checks every structural invariant and throws std::runtime_error naming
  // the violated one.
  void validate(const std::string& origin) const;
};

FisheyeCalibration load_calibration(const std::string& path);
void save_calibration(const FisheyeCalibration& calib, const std::string& path);

}  // namespace smseg
