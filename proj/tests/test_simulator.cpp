#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <set>

#include "smseg/constraints.hpp"
#include "smseg/pipeline.hpp"
#include "smseg/simulator.hpp"

using namespace smseg;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& leaf) {
  const fs::path dir = fs::temp_directory_path() / "smseg_sim_test" / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

bool flows_identical(const FlowField& a, const FlowField& b) {
  if (a.width != b.width || a.height != b.height) return false;
  // memcmp so that NaN padding compares equal as well
  return std::memcmp(a.du.data(), b.du.data(), a.du.size() * sizeof(double)) == 0 &&
         std::memcmp(a.dv.data(), b.dv.data(), a.dv.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("presets: every built-in scene validates") {
  const auto names = preset_names();
  CHECK(names.size() == 7);
  const std::set<std::string> expected = {"crossing",   "overtaking",      "preceding",
                                          "approaching", "static-ego",      "static-world",
                                          "static-obstacle"};
  CHECK(std::set<std::string>(names.begin(), names.end()) == expected);
  for (const auto& name : names) {
    CAPTURE(name);
    const SceneSpec spec = preset_scene(name);
    CHECK(spec.name == name);
    CHECK_NOTHROW(spec.validate());
    CHECK(spec.frames >= 30);  // long enough for the scoring runs
  }
  CHECK_THROWS_AS(preset_scene("freeway"), std::invalid_argument);
}

TEST_CASE("scene validation rejects broken specs") {
  SceneSpec spec = default_scene();
  CHECK_NOTHROW(spec.validate());

  SceneSpec bad = spec;
  bad.frames = 1;
  CHECK_THROWS_AS(bad.validate(), std::runtime_error);

  bad = spec;
  bad.frame_rate = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::runtime_error);

  bad = spec;
  bad.cell_size = 0;
  CHECK_THROWS_AS(bad.validate(), std::runtime_error);

  bad = spec;
  bad.environment_distance = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::runtime_error);

  bad = spec;
  bad.mounting.position.z() = 0.0;  // camera on the road plane
  CHECK_THROWS_AS(bad.validate(), std::runtime_error);

  bad = spec;
  bad.noise_sigma = -0.5;
  CHECK_THROWS_AS(bad.validate(), std::runtime_error);

  bad = spec;
  bad.objects.push_back(SceneObject{});
  bad.objects.back().klass = "two words";  // must stay a single token
  CHECK_THROWS_AS(bad.validate(), std::runtime_error);

  bad = spec;
  bad.objects.push_back(SceneObject{});
  bad.objects.back().half_extents = Vec3(1.0, 0.0, 1.0);
  CHECK_THROWS_AS(bad.validate(), std::runtime_error);
}

TEST_CASE("camera_yaw_rotation points the optical axis along the yaw heading") {
  const Mat3 front = camera_yaw_rotation(0.0);
  CHECK((front * Vec3(0, 0, 1) - Vec3(1, 0, 0)).norm() < 1e-15);   // looks forward
  CHECK((front * Vec3(0, 1, 0) - Vec3(0, 0, -1)).norm() < 1e-15);  // image down = world down
  CHECK((front * Vec3(1, 0, 0) - Vec3(0, -1, 0)).norm() < 1e-15);  // image right = vehicle right

  const Mat3 left = camera_yaw_rotation(M_PI / 2.0);
  CHECK((left * Vec3(0, 0, 1) - Vec3(0, 1, 0)).norm() < 1e-15);

  const Mat3 rear = camera_yaw_rotation(M_PI);
  CHECK((rear * Vec3(0, 0, 1) - Vec3(-1, 0, 0)).norm() < 1e-12);

  for (double yaw : {0.0, 0.4, -1.2, M_PI}) {
    const Mat3 r = camera_yaw_rotation(yaw);
    CHECK((r * r.transpose() - Mat3::Identity()).norm() < 1e-14);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("scene spec round-trips through its text form") {
  SceneSpec spec = preset_scene("crossing");
  spec.noise_sigma = 0.37;
  spec.seed = 987654321;
  spec.host_yaw_rate = -0.0625;
  spec.objects.push_back(SceneObject{"cart", Vec3(4.5, -1.25, 0.5), Vec3(0.5, 0.75, 0.5),
                                     Vec3(-0.125, 2.0, 0.0)});

  const fs::path dir = fresh_dir("spec_roundtrip");
  const std::string path = (dir / "scene.txt").string();
  save_scene_spec(spec, path);
  const SceneSpec back = load_scene_spec(path);

  CHECK(back.name == spec.name);
  CHECK(back.frames == spec.frames);
  CHECK(back.frame_rate == spec.frame_rate);
  CHECK(back.host_speed == spec.host_speed);
  CHECK(back.host_yaw_rate == spec.host_yaw_rate);
  CHECK(back.cell_size == spec.cell_size);
  CHECK(back.noise_sigma == spec.noise_sigma);
  CHECK(back.seed == spec.seed);
  CHECK(back.environment_distance == spec.environment_distance);
  CHECK((back.mounting.rotation - spec.mounting.rotation).norm() == 0.0);
  CHECK((back.mounting.position - spec.mounting.position).norm() == 0.0);
  for (int i = 0; i < 4; ++i) CHECK(back.calibration.coeffs[i] == spec.calibration.coeffs[i]);
  CHECK(back.calibration.theta_max == spec.calibration.theta_max);
  CHECK(back.calibration.width == spec.calibration.width);
  CHECK(back.calibration.principal_point == spec.calibration.principal_point);
  REQUIRE(back.objects.size() == spec.objects.size());
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    CHECK(back.objects[i].klass == spec.objects[i].klass);
    CHECK((back.objects[i].center - spec.objects[i].center).norm() == 0.0);
    CHECK((back.objects[i].half_extents - spec.objects[i].half_extents).norm() == 0.0);
    CHECK((back.objects[i].velocity - spec.objects[i].velocity).norm() == 0.0);
  }
}

TEST_CASE("simulation is deterministic for a fixed seed") {
  SceneSpec spec = preset_scene("crossing");
  spec.frames = 3;
  spec.noise_sigma = 0.4;

  const SimulatedDataset a = simulate(spec);
  const SimulatedDataset b = simulate(spec);
  REQUIRE(a.flows.size() == 2);
  REQUIRE(b.flows.size() == 2);
  CHECK(flows_identical(a.flows[0], b.flows[0]));
  CHECK(flows_identical(a.flows[1], b.flows[1]));

  spec.seed += 1;
  const SimulatedDataset c = simulate(spec);
  CHECK_FALSE(flows_identical(a.flows[0], c.flows[0]));
}

TEST_CASE("noise-free flow is constant within each cell") {
  SceneSpec spec = preset_scene("static-world");
  spec.frames = 2;
  const SimulatedDataset data = simulate(spec);
  const FlowField& flow = data.flows.front();

  int checked = 0;
  for (int cy = 0; cy < 480 / spec.cell_size && checked < 200; ++cy) {
    for (int cx = 0; cx < 640 / spec.cell_size && checked < 200; ++cx) {
      const int x0 = cx * spec.cell_size;
      const int y0 = cy * spec.cell_size;
      if (!flow.valid(x0, y0)) continue;
      ++checked;
      for (int dy = 0; dy < spec.cell_size; ++dy) {
        for (int dx = 0; dx < spec.cell_size; ++dx) {
          CHECK(flow.du[flow.index(x0 + dx, y0 + dy)] == flow.du[flow.index(x0, y0)]);
          CHECK(flow.dv[flow.index(x0 + dx, y0 + dy)] == flow.dv[flow.index(x0, y0)]);
        }
      }
    }
  }
  CHECK(checked == 200);
}

TEST_CASE("static scene flow satisfies the true epipolar geometry") {
  SceneSpec spec = preset_scene("static-world");
  spec.frames = 2;
  const SimulatedDataset data = simulate(spec);

  // Pair geometry straight from the simulator's pose track, not from the
  // odometry module, so this cross-checks both sides.
  const Mat3 rotation = data.camera_rotations[1].transpose() * data.camera_rotations[0];
  const Vec3 translation =
      data.camera_rotations[1].transpose() * (data.camera_centers[0] - data.camera_centers[1]);
  REQUIRE(translation.norm() > 0.01);
  const UnitVec3 epipole(translation);

  const FlowGrid grid = average_flow(data.flows.front(), spec.cell_size);
  const auto corrs = lift_correspondences(grid, spec.calibration, rotation, nullptr);
  REQUIRE(corrs.size() > 3000);

  double worst = 0.0;
  for (const auto& c : corrs) {
    const EpipolarFrame frame = make_epipolar_frame(c.ray_prev, epipole);
    const auto dev = epipolar_deviation(frame, c.ray_cur);
    if (!dev.has_value()) continue;  // ray through the epipole
    worst = std::max(worst, *dev);
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("pair geometry from odometry matches the simulator pose track") {
  SceneSpec spec = preset_scene("approaching");  // curved mounting, turning host
  spec.host_yaw_rate = 0.15;
  spec.frames = 5;
  const SimulatedDataset data = simulate(spec);

  const double dt = 1.0 / spec.frame_rate;
  for (int k = 0; k + 1 < spec.frames; ++k) {
    CAPTURE(k);
    const PlanarPose delta = dead_reckon(data.odometry, k * dt, (k + 1) * dt);
    const FramePairGeometry geom = camera_motion(delta, spec.mounting, 0.005);
    const Mat3 rotation = data.camera_rotations[k + 1].transpose() * data.camera_rotations[k];
    const Vec3 translation = data.camera_rotations[k + 1].transpose() *
                             (data.camera_centers[k] - data.camera_centers[k + 1]);
    CHECK((geom.rotation - rotation).norm() < 1e-12);
    CHECK((geom.translation - translation).norm() < 1e-12);
  }
}

TEST_CASE("cell truth marks the moving object and nothing else") {
  SceneSpec spec = preset_scene("crossing");
  spec.frames = 4;
  const SimulatedDataset data = simulate(spec);
  REQUIRE(data.cell_truth.size() == 3);

  int moving_cells = 0;
  int static_labeled = 0;
  for (const auto& truth : data.cell_truth) {
    for (std::size_t i = 0; i < truth.moving.size(); ++i) {
      if (truth.moving[i]) {
        ++moving_cells;
        CHECK(truth.object_index[i] >= 0);
      } else {
        CHECK(truth.object_index[i] == -1);
        ++static_labeled;
      }
    }
  }
  CHECK(moving_cells > 20);            // the pedestrian covers a patch of cells
  CHECK(static_labeled > 3 * 10000);   // nearly all of each 12288-cell grid

  SceneSpec silent = preset_scene("static-world");
  silent.frames = 3;
  const SimulatedDataset quiet = simulate(silent);
  for (const auto& truth : quiet.cell_truth) {
    CHECK(std::count(truth.moving.begin(), truth.moving.end(), std::uint8_t(1)) == 0);
  }
  CHECK(quiet.truth.empty());
}

TEST_CASE("ground truth records round-trip through their text files") {
  std::vector<GroundTruthObject> truth(2);
  truth[0].frame = 3;
  truth[0].object_id = 0;
  truth[0].klass = "pedestrian";
  truth[0].centroid_vehicle = Vec2(6.125, -1.75);
  truth[0].ground_distance = truth[0].centroid_vehicle.norm();
  truth[0].polygon = {Vec2(10.5, 20.25), Vec2(30.0, 21.0), Vec2(18.0, 44.5)};
  truth[1].frame = 4;
  truth[1].object_id = 2;
  truth[1].klass = "vehicle";
  truth[1].centroid_vehicle = Vec2(-3.5, 0.25);
  truth[1].ground_distance = truth[1].centroid_vehicle.norm();
  truth[1].polygon = {Vec2(100, 200), Vec2(140, 198), Vec2(142, 260), Vec2(99, 255), Vec2(95, 230)};

  const fs::path dir = fresh_dir("truth_roundtrip");
  const std::string records = (dir / "objects.txt").string();
  const std::string polygons = (dir / "polygons.txt").string();
  write_ground_truth(truth, records, polygons);
  const auto back = read_ground_truth(records, polygons);

  REQUIRE(back.size() == truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    CHECK(back[i].frame == truth[i].frame);
    CHECK(back[i].object_id == truth[i].object_id);
    CHECK(back[i].klass == truth[i].klass);
    CHECK((back[i].centroid_vehicle - truth[i].centroid_vehicle).norm() == 0.0);
    CHECK(back[i].ground_distance == truth[i].ground_distance);
    REQUIRE(back[i].polygon.size() == truth[i].polygon.size());
    for (std::size_t v = 0; v < truth[i].polygon.size(); ++v) {
      CHECK((back[i].polygon[v] - truth[i].polygon[v]).norm() == 0.0);
    }
  }
}

TEST_CASE("simulated ground truth tracks the crossing pedestrian") {
  SceneSpec spec = preset_scene("crossing");
  const SimulatedDataset data = simulate(spec);
  REQUIRE_FALSE(data.truth.empty());

  std::set<int> frames_seen;
  for (const auto& obj : data.truth) {
    CHECK(obj.klass == "pedestrian");
    CHECK(obj.object_id == 0);
    CHECK(obj.polygon.size() >= 3);
    CHECK(obj.ground_distance == doctest::Approx(obj.centroid_vehicle.norm()).epsilon(1e-12));
    for (const auto& v : obj.polygon) {
      CHECK(v.x() > -1000.0);
      CHECK(v.x() < 1640.0);  // projected outline stays near the image
      CHECK(v.y() > -1000.0);
      CHECK(v.y() < 1480.0);
    }
    frames_seen.insert(obj.frame);
  }
  // visible the whole drive: one record for every frame pair's previous frame
  CHECK(static_cast<int>(frames_seen.size()) == spec.frames - 1);
}

TEST_CASE("convex_hull returns the counter-clockwise outline") {
  std::vector<Vec2> pts = {Vec2(0, 0), Vec2(4, 0),   Vec2(4, 3), Vec2(0, 3),
                           Vec2(2, 1), Vec2(1, 2.9), Vec2(3.9, 0.1)};
  const auto hull = convex_hull(pts);
  REQUIRE(hull.size() == 4);

  double area2 = 0.0;  // shoelace, positive for counter-clockwise
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec2& a = hull[i];
    const Vec2& b = hull[(i + 1) % hull.size()];
    area2 += a.x() * b.y() - b.x() * a.y();
  }
  CHECK(area2 == doctest::Approx(2.0 * 12.0).epsilon(1e-12));

  const auto degenerate = convex_hull({Vec2(0, 0), Vec2(1, 1), Vec2(2, 2), Vec2(3, 3)});
  CHECK(degenerate.size() < 3);
}

TEST_CASE("write_dataset produces a complete, reloadable directory") {
  SceneSpec spec = preset_scene("overtaking");
  spec.frames = 3;
  const SimulatedDataset data = simulate(spec);
  const fs::path dir = fresh_dir("dataset");
  write_dataset(data, dir.string());

  for (const char* name : {"flow_000000.smfl", "flow_000001.smfl", "odometry.txt",
                           "calibration.txt", "mounting.txt", "objects.txt", "polygons.txt",
                           "scene.txt"}) {
    CAPTURE(name);
    CHECK(fs::exists(dir / name));
  }

  const FlowField flow = read_flow((dir / "flow_000000.smfl").string());
  CHECK(flow.width == 640);
  CHECK(flow.height == 480);
  // on-disk format is float32; in-memory doubles survive within float precision
  for (int i : {1000, 5000, 150000}) {
    if (std::isnan(data.flows[0].du[i])) {
      CHECK(std::isnan(flow.du[i]));
    } else {
      CHECK(flow.du[i] == doctest::Approx(data.flows[0].du[i]).epsilon(1e-6));
    }
  }

  const SceneSpec back = load_scene_spec((dir / "scene.txt").string());
  CHECK(back.name == spec.name);
  CHECK(back.frames == spec.frames);
  CHECK((back.mounting.rotation - spec.mounting.rotation).norm() == 0.0);

  const auto samples = read_odometry((dir / "odometry.txt").string());
  CHECK(samples.size() >= 3);
  CHECK(samples.front().speed == spec.host_speed);

  const auto truth = read_ground_truth((dir / "objects.txt").string(),
                                       (dir / "polygons.txt").string());
  CHECK(truth.size() == data.truth.size());
}
