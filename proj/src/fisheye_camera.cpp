#include "smseg/fisheye_camera.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "smseg/config_text.hpp"

namespace smseg {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kFovSlack = 1e-9;  // tolerance when testing against the rim

}  // namespace

double FisheyeCalibration::radius_of_angle(double theta) const {
  return theta * (coeffs[0] + theta * (coeffs[1] + theta * (coeffs[2] + theta * coeffs[3])));
}

double FisheyeCalibration::radius_slope(double theta) const {
  return coeffs[0] + theta * (2.0 * coeffs[1] + theta * (3.0 * coeffs[2] + theta * 4.0 * coeffs[3]));
}

double FisheyeCalibration::angle_of_radius(double radius) const {
  if (!(radius >= 0.0)) throw std::domain_error("angle_of_radius: negative radius");
  const double rim = rim_radius();
  if (radius > rim + kFovSlack * std::max(1.0, rim)) {
    throw std::domain_error("angle_of_radius: radius " + format_double(radius) +
                            " beyond field-of-view rim " + format_double(rim));
  }
  if (radius == 0.0) return 0.0;
  if (radius >= rim) return theta_max;

  double lo = 0.0, hi = theta_max;
  double theta = std::min(std::max(radius / coeffs[0], 1e-12), theta_max - 1e-12);
  for (int it = 0; it < 100; ++it) {
    const double f = radius_of_angle(theta) - radius;
    if (f > 0.0) {
      hi = theta;
    } else if (f < 0.0) {
      lo = theta;
    } else {
      return theta;
    }
    const double slope = radius_slope(theta);
    double next = theta - f / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // Newton left the bracket
    if (std::abs(next - theta) < 1e-12) return next;
    theta = next;
  }
  return theta;
}

UnitVec3 FisheyeCalibration::unproject(const Vec2& pixel) const {
  const Vec2 off = pixel - principal_point;
  const double r = off.norm();
  if (r < 1e-12) return UnitVec3::from_unit(Vec3(0.0, 0.0, 1.0));
  const double theta = angle_of_radius(r);
  const double s = std::sin(theta) / r;
  return UnitVec3(Vec3(s * off.x(), s * off.y(), std::cos(theta)));
}

Vec2 FisheyeCalibration::project(const Vec3& direction) const {
  auto px = try_project(direction);
  if (!px) throw std::domain_error("project: direction outside the field of view");
  return *px;
}

std::optional<Vec2> FisheyeCalibration::try_project(const Vec3& direction) const {
  const double rho = std::hypot(direction.x(), direction.y());
  const double theta = std::atan2(rho, direction.z());
  if (theta > theta_max + kFovSlack) return std::nullopt;
  if (rho < 1e-300) return principal_point;
  const double r = radius_of_angle(std::min(theta, theta_max));
  return Vec2(principal_point + (r / rho) * Vec2(direction.x(), direction.y()));
}

bool FisheyeCalibration::in_fov(const Vec3& direction) const {
  const double rho = std::hypot(direction.x(), direction.y());
  return std::atan2(rho, direction.z()) <= theta_max + kFovSlack;
}

bool FisheyeCalibration::pixel_in_fov(const Vec2& pixel) const {
  return (pixel - principal_point).norm() <= rim_radius() + kFovSlack;
}

bool FisheyeCalibration::in_image(const Vec2& pixel) const {
  return pixel.x() >= 0.0 && pixel.x() <= width - 1 && pixel.y() >= 0.0 && pixel.y() <= height - 1;
}

UnitVec3 FisheyeCalibration::horizon_vector() const {
  return UnitVec3(road_to_camera * Vec3(0.0, 0.0, -1.0));
}

void FisheyeCalibration::validate(const std::string& origin) const {
  auto bad = [&origin](const std::string& what) {
    throw std::runtime_error(origin + ": invariant violated: " + what);
  };

  if (width <= 0 || height <= 0) bad("image_size must be positive");
  if (!(theta_max > 0.0) || theta_max > kPi) bad("theta_max must lie in (0, pi]");
  if (!principal_point.allFinite()) bad("principal_point must be finite");
  for (double c : coeffs) {
    if (!std::isfinite(c)) bad("coeffs must be finite");
  }
  if (!(coeffs[0] > 0.0)) bad("radial polynomial slope at theta=0 must be positive");

  // Strict monotonicity of r(theta) on [0, theta_max]: the slope is a cubic,
  // so its minimum on the interval is attained at an endpoint or at a root of
  // the (quadratic) second derivative. Check those points exactly.
  std::vector<double> candidates = {0.0, theta_max};
  const double qa = 12.0 * coeffs[3], qb = 6.0 * coeffs[2], qc = 2.0 * coeffs[1];
  if (std::abs(qa) > 0.0) {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      candidates.push_back((-qb + sq) / (2.0 * qa));
      candidates.push_back((-qb - sq) / (2.0 * qa));
    }
  } else if (std::abs(qb) > 0.0) {
    candidates.push_back(-qc / qb);
  }
  for (double t : candidates) {
    if (t < 0.0 || t > theta_max) continue;
    const double slope = radius_slope(t);
    if (!(slope > 0.0)) {
      bad("radial polynomial must be strictly increasing on (0, theta_max] (slope " +
          format_double(slope) + " at theta " + format_double(t) + ")");
    }
  }

  const Mat3& r = road_to_camera;
  if ((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9) {
    bad("road_to_camera must be orthonormal within 1e-9");
  }
  if (std::abs(r.determinant() - 1.0) > 1e-9) {
    bad("road_to_camera must be a proper rotation (determinant 1)");
  }
  if (!(camera_height > 0.0)) bad("camera_height must be positive");
}

FisheyeCalibration load_calibration(const std::string& path) {
  const KeyValueFile kv = KeyValueFile::load(path);
  FisheyeCalibration c;
  const auto coeffs = kv.get_doubles("coeffs", 4);
  std::copy(coeffs.begin(), coeffs.end(), c.coeffs.begin());
  c.theta_max = kv.get_double("theta_max");
  const auto size = kv.get_doubles("image_size", 2);
  c.width = static_cast<int>(size[0]);
  c.height = static_cast<int>(size[1]);
  const auto pp = kv.get_doubles("principal_point", 2);
  c.principal_point = Vec2(pp[0], pp[1]);
  const auto rot = kv.get_doubles("road_to_camera", 9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) c.road_to_camera(i, j) = rot[3 * i + j];
  c.camera_height = kv.get_double("camera_height");
  c.validate(path);
  return c;
}

void save_calibration(const FisheyeCalibration& calib, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "coeffs";
  for (double c : calib.coeffs) out << ' ' << format_double(c);
  out << '\n';
  out << "theta_max " << format_double(calib.theta_max) << '\n';
  out << "image_size " << calib.width << ' ' << calib.height << '\n';
  out << "principal_point " << format_double(calib.principal_point.x()) << ' '
      << format_double(calib.principal_point.y()) << '\n';
  out << "road_to_camera";
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out << ' ' << format_double(calib.road_to_camera(i, j));
  out << '\n';
  out << "camera_height " << format_double(calib.camera_height) << '\n';
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace smseg
