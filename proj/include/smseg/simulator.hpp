#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smseg/fisheye_camera.hpp"
#include "smseg/io.hpp"
#include "smseg/odometry.hpp"
#include "smseg/types.hpp"

namespace smseg {

// Axis-aligned box in the world frame (x forward, y left, z up; road plane
// z = 0), moving at constant velocity. A zero velocity makes it a static
// obstacle that still occludes the road.
struct SceneObject {
  std::string klass = "object";
  Vec3 center = Vec3::Zero();        // at t = 0
  Vec3 half_extents = Vec3::Ones();
  Vec3 velocity = Vec3::Zero();      // m/s
};

// Complete description of a synthetic drive: a host vehicle moving at
// constant speed and yaw rate on a flat road, one camera rigidly mounted on
// it, and a set of boxes. The world frame coincides with the vehicle frame
// at t = 0.
struct SceneSpec {
  std::string name = "custom";
  int frames = 40;
  double frame_rate = 15.0;
  double host_speed = 0.0;      // m/s
  double host_yaw_rate = 0.0;   // rad/s
  FisheyeCalibration calibration;
  MountingPose mounting;
  int cell_size = 5;
  double noise_sigma = 0.0;     // i.i.d. Gaussian per pixel and component, px
  std::uint64_t seed = 1;
  double environment_distance = 40.0;  // backdrop range for rays that miss everything
  std::vector<SceneObject> objects;

  void validate() const;
};

// Mounting rotation of a camera looking horizontally at `yaw` radians from
// the vehicle's forward axis (0 = forward, pi/2 = left, pi = rear), with the
// image x axis level and the image y axis pointing down.
Mat3 camera_yaw_rotation(double yaw);

// A scene with the standard front rig and no objects.
SceneSpec default_scene();

// Built-in scenarios: crossing, overtaking, preceding, approaching,
// static-ego, static-world, static-obstacle. Throws std::invalid_argument
// for an unknown name.
SceneSpec preset_scene(const std::string& name);
std::vector<std::string> preset_names();

SceneSpec load_scene_spec(const std::string& path);
void save_scene_spec(const SceneSpec& spec, const std::string& path);

// One moving object observed in one frame: its image-space outline (convex
// hull of the projected box), its ground-plane centroid in the vehicle frame
// of that moment and the corresponding ground distance.
struct GroundTruthObject {
  int frame = 0;
  int object_id = 0;
  std::string klass;
  Vec2 centroid_vehicle = Vec2::Zero();
  double ground_distance = 0.0;
  std::vector<Vec2> polygon;  // pixel coordinates, counter-clockwise
};

void write_ground_truth(const std::vector<GroundTruthObject>& truth, const std::string& records_path,
                        const std::string& polygons_path);
std::vector<GroundTruthObject> read_ground_truth(const std::string& records_path,
                                                 const std::string& polygons_path);

// Per-cell labels of one frame pair, anchored like the flow at the previous
// frame's cell centers. object_index is -1 for cells on static structure.
struct PairCellTruth {
  int cells_x = 0;
  int cells_y = 0;
  std::vector<std::int16_t> object_index;
  std::vector<std::uint8_t> moving;

  std::size_t index(int cx, int cy) const { return static_cast<std::size_t>(cy) * cells_x + cx; }
};

struct SimulatedDataset {
  SceneSpec spec;
  std::vector<FlowField> flows;            // frames - 1 fields
  std::vector<OdometrySample> odometry;
  std::vector<GroundTruthObject> truth;    // moving objects only
  std::vector<PairCellTruth> cell_truth;   // frames - 1 grids
  std::vector<Mat3> camera_rotations;      // camera -> world, per frame
  std::vector<Vec3> camera_centers;        // world, per frame
};

// Renders the scene into per-pair flow fields. Flow is anchored at the cell
// centers of the previous frame and constant over each cell, so pooling
// recovers the exact correspondence; optional pixel noise is averaged down
// by the pooling. Deterministic for a fixed spec (including the seed).
SimulatedDataset simulate(const SceneSpec& spec);

// Writes flow_NNNNNN.smfl, odometry.txt, calibration.txt, mounting.txt,
// objects.txt, polygons.txt and scene.txt (a reloadable copy of the scene description).
void write_dataset(const SimulatedDataset& data, const std::string& dir);

// 2D convex hull (Andrew monotone chain), counter-clockwise, no repeated
// last point. Returns fewer than 3 points for degenerate input.
std::vector<Vec2> convex_hull(std::vector<Vec2> points);

}  // namespace smseg
