#pragma once

#include <optional>
#include <string>
#include <vector>

#include "smseg/types.hpp"

namespace smseg {

// One planar odometry measurement: wheel speed along the heading (m/s) and
// yaw rate (rad/s, counter-clockwise positive). Values are held constant
// until the next sample (zero-order hold).
struct OdometrySample {
  double timestamp = 0.0;
  double speed = 0.0;
  double yaw_rate = 0.0;
};

// Text log, one "timestamp speed yaw_rate" triple per line, '#' comments.
// Timestamps must be finite and strictly increasing.
std::vector<OdometrySample> read_odometry(const std::string& path);
void write_odometry(const std::vector<OdometrySample>& samples, const std::string& path);

// Integrates the vehicle pose increment over [t0, t1], expressed in the
// vehicle frame at t0. Each zero-order-hold interval is a circular arc (or a
// straight segment when the yaw rate vanishes) and is integrated in closed
// form, so splitting the window at any interior time composes to the same
// increment up to rounding. Requires sample coverage of the whole window.
PlanarPose dead_reckon(const std::vector<OdometrySample>& samples, double t0, double t1);

// Rigid camera-to-vehicle mounting: rotation maps camera coordinates into
// the vehicle frame, position is the optical center in the vehicle frame.
struct MountingPose {
  Mat3 rotation = Mat3::Identity();
  Vec3 position = Vec3::Zero();

  void validate(const std::string& origin) const;
};

MountingPose load_mounting(const std::string& path);
void save_mounting(const MountingPose& mount, const std::string& path);

// Relative geometry of a frame pair in camera coordinates. `rotation` maps
// previous-frame camera coordinates into the current frame; `translation` is
// the previous optical center expressed in the current frame, so the epipole
// of the previous view is translation normalized. Frames whose baseline
// length falls under the motion floor are flagged degenerate and carry no
// epipole.
struct FramePairGeometry {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  bool degenerate = true;
  std::optional<UnitVec3> epipole;
};

FramePairGeometry camera_motion(const PlanarPose& delta, const MountingPose& mount,
                                double motion_floor);

}  // namespace smseg
