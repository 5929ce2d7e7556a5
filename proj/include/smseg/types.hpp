#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <stdexcept>

namespace smseg {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Direction on the unit projection sphere. Construction normalizes; a
// near-zero input has no direction and is rejected.
class UnitVec3 {
 public:
  explicit UnitVec3(const Vec3& v) {
    const double n = v.norm();
    if (!(n > 1e-15) || !std::isfinite(n)) {
      throw std::invalid_argument("UnitVec3: cannot normalize zero-length or non-finite vector");
    }
    v_ = v / n;
  }

  // Wraps a vector that is already unit length (not re-normalized).
  static UnitVec3 from_unit(const Vec3& v) {
    UnitVec3 u;
    u.v_ = v;
    return u;
  }

  const Vec3& vec() const { return v_; }
  operator const Vec3&() const { return v_; }

  double dot(const UnitVec3& o) const { return v_.dot(o.v_); }
  double dot(const Vec3& o) const { return v_.dot(o); }
  Vec3 cross(const UnitVec3& o) const { return v_.cross(o.v_); }
  Vec3 cross(const Vec3& o) const { return v_.cross(o); }

  double x() const { return v_.x(); }
  double y() const { return v_.y(); }
  double z() const { return v_.z(); }

 private:
  UnitVec3() = default;
  Vec3 v_ = Vec3::Zero();
};

// Planar rigid pose (or pose increment) on the ground plane: position plus
// heading, with x forward and y left in the reference frame.
struct PlanarPose {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;  // heading, rad, counter-clockwise about +z (up)

  // Pose of `local` expressed in this pose's reference frame.
  PlanarPose compose(const PlanarPose& local) const {
    const double c = std::cos(psi), s = std::sin(psi);
    return {x + c * local.x - s * local.y, y + s * local.x + c * local.y, psi + local.psi};
  }
};

// Interior angle between two nonzero vectors, in [0, pi]. Stable near 0 and
// pi, unlike acos of the normalized dot product.
inline double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

}  // namespace smseg
