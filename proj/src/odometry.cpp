#include "smseg/odometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "smseg/config_text.hpp"

namespace smseg {

std::vector<OdometrySample> read_odometry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  std::vector<OdometrySample> samples;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    OdometrySample s;
    if (!(ss >> s.timestamp)) continue;  // blank line
    std::string rest;
    if (!(ss >> s.speed >> s.yaw_rate) || (ss >> rest)) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 'timestamp speed yaw_rate'");
    }
    if (!std::isfinite(s.timestamp) || !std::isfinite(s.speed) || !std::isfinite(s.yaw_rate)) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": non-finite value");
    }
    if (!samples.empty() && !(s.timestamp > samples.back().timestamp)) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": timestamps must be strictly increasing");
    }
    samples.push_back(s);
  }
  if (samples.empty()) throw std::runtime_error(path + ": no odometry samples");
  return samples;
}

void write_odometry(const std::vector<OdometrySample>& samples, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "# timestamp wheel_speed yaw_rate\n";
  for (const auto& s : samples) {
    out << format_double(s.timestamp) << ' ' << format_double(s.speed) << ' '
        << format_double(s.yaw_rate) << '\n';
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

PlanarPose dead_reckon(const std::vector<OdometrySample>& samples, double t0, double t1) {
  if (samples.empty()) throw std::runtime_error("dead_reckon: empty odometry log");
  if (!(t1 >= t0)) throw std::runtime_error("dead_reckon: window end precedes start");
  if (t0 < samples.front().timestamp || t1 > samples.back().timestamp) {
    throw std::runtime_error("dead_reckon: window [" + format_double(t0) + ", " + format_double(t1) +
                             "] not covered by the odometry log");
  }

  PlanarPose pose;
  // Index of the sample active at t0: the last sample at or before it.
  auto it = std::upper_bound(samples.begin(), samples.end(), t0,
                             [](double t, const OdometrySample& s) { return t < s.timestamp; });
  std::size_t k = static_cast<std::size_t>(it - samples.begin()) - 1;

  double t = t0;
  while (t < t1) {
    const OdometrySample& s = samples[k];
    const double seg_end = (k + 1 < samples.size()) ? std::min(samples[k + 1].timestamp, t1) : t1;
    const double dt = seg_end - t;
    if (dt > 0.0) {
      if (std::abs(s.yaw_rate) < 1e-12) {
        pose.x += s.speed * dt * std::cos(pose.psi);
        pose.y += s.speed * dt * std::sin(pose.psi);
        pose.psi += s.yaw_rate * dt;
      } else {
        const double psi1 = pose.psi + s.yaw_rate * dt;
        const double r = s.speed / s.yaw_rate;
        pose.x += r * (std::sin(psi1) - std::sin(pose.psi));
        pose.y += r * (std::cos(pose.psi) - std::cos(psi1));
        pose.psi = psi1;
      }
    }
    t = seg_end;
    ++k;
  }
  return pose;
}

void MountingPose::validate(const std::string& origin) const {
  auto bad = [&origin](const std::string& what) {
    throw std::runtime_error(origin + ": invariant violated: " + what);
  };
  if ((rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9) {
    bad("rotation must be orthonormal within 1e-9");
  }
  if (std::abs(rotation.determinant() - 1.0) > 1e-9) {
    bad("rotation must be a proper rotation (determinant 1)");
  }
  if (!position.allFinite()) bad("position must be finite");
}

MountingPose load_mounting(const std::string& path) {
  const KeyValueFile kv = KeyValueFile::load(path);
  MountingPose m;
  const auto rot = kv.get_doubles("rotation", 9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m.rotation(i, j) = rot[3 * i + j];
  const auto pos = kv.get_doubles("position", 3);
  m.position = Vec3(pos[0], pos[1], pos[2]);
  m.validate(path);
  return m;
}

void save_mounting(const MountingPose& mount, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "rotation";
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out << ' ' << format_double(mount.rotation(i, j));
  out << '\n';
  out << "position";
  for (int i = 0; i < 3; ++i) out << ' ' << format_double(mount.position[i]);
  out << '\n';
  if (!out) throw std::runtime_error(path + ": write failed");
}

FramePairGeometry camera_motion(const PlanarPose& delta, const MountingPose& mount,
                                double motion_floor) {
  const double c = std::cos(delta.psi), s = std::sin(delta.psi);
  Mat3 r_delta;  // vehicle frame at t1 -> vehicle frame at t0
  r_delta << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  const Vec3 d(delta.x, delta.y, 0.0);

  FramePairGeometry g;
  g.rotation = mount.rotation.transpose() * r_delta.transpose() * mount.rotation;
  g.translation =
      mount.rotation.transpose() * (r_delta.transpose() * (mount.position - d) - mount.position);
  g.degenerate = g.translation.norm() < motion_floor;
  if (!g.degenerate) g.epipole = UnitVec3(g.translation);
  return g;
}

}  // namespace smseg
