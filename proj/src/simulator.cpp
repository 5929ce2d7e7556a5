#include "smseg/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "smseg/config_text.hpp"
#include "smseg/flow_grid.hpp"

namespace smseg {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Deterministic standard-normal generator (Box-Muller on explicit 53-bit
// uniforms) so noisy datasets replay bit-identically for a fixed seed.
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

 private:
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::mt19937_64 engine_;
};

FisheyeCalibration make_rig_calibration(const std::array<double, 4>& coeffs,
                                        const MountingPose& mount) {
  FisheyeCalibration c;
  c.coeffs = coeffs;
  c.theta_max = 1.8;
  c.width = 640;
  c.height = 480;
  c.principal_point = Vec2(320.0, 240.0);
  c.road_to_camera = mount.rotation.transpose();
  c.camera_height = mount.position.z();
  return c;
}

MountingPose make_mounting(double yaw, const Vec3& position) {
  MountingPose m;
  m.rotation = camera_yaw_rotation(yaw);
  m.position = position;
  return m;
}

struct RayBoxHit {
  bool hit = false;
  double distance = 0.0;
};

RayBoxHit intersect_ray_box(const Vec3& origin, const Vec3& dir, const Vec3& lo, const Vec3& hi) {
  double t0 = 1e-9, t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dir[a]) < 1e-15) {
      if (origin[a] < lo[a] || origin[a] > hi[a]) return {};
      continue;
    }
    const double inv = 1.0 / dir[a];
    double ta = (lo[a] - origin[a]) * inv;
    double tb = (hi[a] - origin[a]) * inv;
    if (inv < 0.0) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return {};
  }
  return {true, t0};
}

Mat3 yaw_to_world(double psi) {
  const double c = std::cos(psi), s = std::sin(psi);
  Mat3 r;
  r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return r;
}

}  // namespace

Mat3 camera_yaw_rotation(double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  Mat3 r;
  // Columns: camera x (image right), y (image down), z (optical axis) in
  // vehicle coordinates.
  r.col(0) = Vec3(s, -c, 0.0);
  r.col(1) = Vec3(0.0, 0.0, -1.0);
  r.col(2) = Vec3(c, s, 0.0);
  return r;
}

void SceneSpec::validate() const {
  auto bad = [this](const std::string& what) {
    throw std::runtime_error("scene '" + name + "': " + what);
  };
  if (frames < 2) bad("frames must be at least 2");
  if (!(frame_rate > 0.0)) bad("frame_rate must be positive");
  if (cell_size < 1) bad("cell_size must be at least 1");
  if (!(noise_sigma >= 0.0)) bad("noise_sigma must be non-negative");
  if (!(environment_distance > 0.0)) bad("environment_distance must be positive");
  if (!(mounting.position.z() > 0.0)) bad("camera must be mounted above the road");
  mounting.validate("scene '" + name + "' mounting");
  calibration.validate("scene '" + name + "' calibration");
  for (const auto& o : objects) {
    if (!(o.half_extents.minCoeff() > 0.0)) bad("object half_extents must be positive");
    if (!o.center.allFinite() || !o.velocity.allFinite()) bad("object pose must be finite");
    if (o.klass.empty() || o.klass.find_first_of(" \t") != std::string::npos) {
      bad("object class must be a single token");
    }
  }
}

SceneSpec default_scene() {
  SceneSpec s;
  s.name = "static-world";
  s.mounting = make_mounting(0.0, Vec3(2.0, 0.0, 0.6));
  s.calibration = make_rig_calibration({250.0, 0.0, -15.0, 0.0}, s.mounting);
  s.host_speed = 3.0;
  return s;
}

SceneSpec preset_scene(const std::string& name) {
  SceneSpec s = default_scene();
  s.name = name;
  if (name == "static-world") {
    return s;
  }
  if (name == "crossing") {
    // Pedestrian walking across the host's path from the right, front camera.
    s.host_speed = 1.5;
    s.objects.push_back({"pedestrian", Vec3(7.0, -2.5, 0.9), Vec3(0.25, 0.25, 0.9),
                         Vec3(0.0, 1.2, 0.0)});
    return s;
  }
  if (name == "overtaking") {
    // Faster car pulling alongside in the left lane, rear camera.
    s.mounting = make_mounting(kPi, Vec3(-2.0, 0.0, 0.6));
    s.calibration = make_rig_calibration({300.0, -10.0, -5.0, 0.0}, s.mounting);
    s.host_speed = 5.0;
    s.objects.push_back({"vehicle", Vec3(-6.0, 2.5, 0.75), Vec3(2.2, 0.9, 0.75),
                         Vec3(6.5, 0.0, 0.0)});
    return s;
  }
  if (name == "preceding") {
    // Slightly slower van ahead in the host lane, elevated front camera.
    s.mounting = make_mounting(0.0, Vec3(2.0, 0.0, 1.2));
    s.calibration = make_rig_calibration({250.0, 0.0, -15.0, 0.0}, s.mounting);
    s.host_speed = 5.0;
    s.objects.push_back({"vehicle", Vec3(7.5, 0.3, 0.75), Vec3(1.5, 0.9, 0.75),
                         Vec3(4.0, 0.0, 0.0)});
    return s;
  }
  if (name == "approaching") {
    // Oncoming car in the opposite lane, elevated left side camera.
    s.mounting = make_mounting(0.5 * kPi, Vec3(0.5, 1.0, 1.2));
    s.calibration = make_rig_calibration({300.0, -10.0, -5.0, 0.0}, s.mounting);
    s.host_speed = 2.0;
    s.frames = 50;
    s.objects.push_back({"vehicle", Vec3(13.5, 2.8, 0.75), Vec3(2.2, 0.9, 0.75),
                         Vec3(-5.0, 0.0, 0.0)});
    return s;
  }
  if (name == "static-ego") {
    // Host at rest, pedestrian crossing in front; under the motion floor the
    // degenerate residual must carry the detection.
    s.host_speed = 0.0;
    s.objects.push_back({"pedestrian", Vec3(5.0, -1.5, 0.9), Vec3(0.25, 0.25, 0.9),
                         Vec3(0.0, 1.2, 0.0)});
    return s;
  }
  if (name == "static-obstacle") {
    // Tall pole near the path: a static scene the road constraints are known
    // to flag (anti-parallel residual on its elevated cells).
    s.objects.push_back({"pole", Vec3(6.0, 1.2, 1.0), Vec3(0.15, 0.15, 1.0), Vec3::Zero()});
    return s;
  }
  throw std::invalid_argument("unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() {
  return {"crossing",   "overtaking",   "preceding",      "approaching",
          "static-ego", "static-world", "static-obstacle"};
}

SceneSpec load_scene_spec(const std::string& path) {
  const KeyValueFile kv = KeyValueFile::load(path);
  SceneSpec s;
  s.name = kv.get_string_or("name", "custom");
  s.frames = static_cast<int>(kv.get_int("frames"));
  s.frame_rate = kv.get_double("frame_rate");
  s.host_speed = kv.get_double("host_speed");
  s.host_yaw_rate = kv.get_double_or("host_yaw_rate", 0.0);
  s.cell_size = static_cast<int>(kv.get_int_or("cell_size", 5));
  s.noise_sigma = kv.get_double_or("noise_sigma", 0.0);
  s.seed = kv.has("seed") ? kv.get_uint("seed") : 1;
  s.environment_distance = kv.get_double_or("environment_distance", 40.0);

  const auto rot = kv.get_doubles("mounting_rotation", 9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s.mounting.rotation(i, j) = rot[3 * i + j];
  const auto pos = kv.get_doubles("mounting_position", 3);
  s.mounting.position = Vec3(pos[0], pos[1], pos[2]);

  const auto coeffs = kv.get_doubles("calibration_coeffs", 4);
  std::array<double, 4> ca;
  std::copy(coeffs.begin(), coeffs.end(), ca.begin());
  s.calibration = make_rig_calibration(ca, s.mounting);
  s.calibration.theta_max = kv.get_double_or("calibration_theta_max", 1.8);
  const auto size = kv.has("calibration_image_size") ? kv.get_doubles("calibration_image_size", 2)
                                                     : std::vector<double>{640.0, 480.0};
  s.calibration.width = static_cast<int>(size[0]);
  s.calibration.height = static_cast<int>(size[1]);
  const auto pp = kv.has("calibration_principal_point")
                      ? kv.get_doubles("calibration_principal_point", 2)
                      : std::vector<double>{0.5 * size[0], 0.5 * size[1]};
  s.calibration.principal_point = Vec2(pp[0], pp[1]);

  const int count = static_cast<int>(kv.get_int_or("object_count", 0));
  for (int i = 0; i < count; ++i) {
    const std::string key = "object_" + std::to_string(i);
    if (!kv.has(key)) throw std::runtime_error(path + ": missing key '" + key + "'");
    const auto& tokens = kv.entries().at(key);
    SceneObject o;
    std::istringstream ss([&] {
      std::string joined;
      for (const auto& tok : tokens) (joined += tok) += ' ';
      return joined;
    }());
    if (!(ss >> o.klass >> o.center.x() >> o.center.y() >> o.center.z() >> o.half_extents.x() >>
          o.half_extents.y() >> o.half_extents.z() >> o.velocity.x() >> o.velocity.y() >>
          o.velocity.z())) {
      throw std::runtime_error(path + ": key '" + key +
                               "': expected 'class cx cy cz hx hy hz vx vy vz'");
    }
    s.objects.push_back(o);
  }
  s.validate();
  return s;
}

void save_scene_spec(const SceneSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "name " << spec.name << '\n';
  out << "frames " << spec.frames << '\n';
  out << "frame_rate " << format_double(spec.frame_rate) << '\n';
  out << "host_speed " << format_double(spec.host_speed) << '\n';
  out << "host_yaw_rate " << format_double(spec.host_yaw_rate) << '\n';
  out << "cell_size " << spec.cell_size << '\n';
  out << "noise_sigma " << format_double(spec.noise_sigma) << '\n';
  out << "seed " << spec.seed << '\n';
  out << "environment_distance " << format_double(spec.environment_distance) << '\n';
  out << "mounting_rotation";
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out << ' ' << format_double(spec.mounting.rotation(i, j));
  out << '\n';
  out << "mounting_position";
  for (int i = 0; i < 3; ++i) out << ' ' << format_double(spec.mounting.position[i]);
  out << '\n';
  out << "calibration_coeffs";
  for (double c : spec.calibration.coeffs) out << ' ' << format_double(c);
  out << '\n';
  out << "calibration_theta_max " << format_double(spec.calibration.theta_max) << '\n';
  out << "calibration_image_size " << spec.calibration.width << ' ' << spec.calibration.height
      << '\n';
  out << "calibration_principal_point " << format_double(spec.calibration.principal_point.x())
      << ' ' << format_double(spec.calibration.principal_point.y()) << '\n';
  out << "object_count " << spec.objects.size() << '\n';
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    const auto& o = spec.objects[i];
    out << "object_" << i << ' ' << o.klass;
    for (int a = 0; a < 3; ++a) out << ' ' << format_double(o.center[a]);
    for (int a = 0; a < 3; ++a) out << ' ' << format_double(o.half_extents[a]);
    for (int a = 0; a < 3; ++a) out << ' ' << format_double(o.velocity[a]);
    out << '\n';
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

void write_ground_truth(const std::vector<GroundTruthObject>& truth, const std::string& records_path,
                        const std::string& polygons_path) {
  std::ofstream rec(records_path);
  if (!rec) throw std::runtime_error(records_path + ": cannot open for writing");
  rec << "# frame object_id class centroid_x centroid_y ground_distance\n";
  std::ofstream poly(polygons_path);
  if (!poly) throw std::runtime_error(polygons_path + ": cannot open for writing");
  poly << "# frame object_id vertex_count u v ...\n";
  for (const auto& t : truth) {
    rec << t.frame << ' ' << t.object_id << ' ' << t.klass << ' '
        << format_double(t.centroid_vehicle.x()) << ' ' << format_double(t.centroid_vehicle.y())
        << ' ' << format_double(t.ground_distance) << '\n';
    poly << t.frame << ' ' << t.object_id << ' ' << t.polygon.size();
    for (const auto& v : t.polygon) {
      poly << ' ' << format_double(v.x()) << ' ' << format_double(v.y());
    }
    poly << '\n';
  }
  if (!rec || !poly) throw std::runtime_error("ground truth write failed");
}

std::vector<GroundTruthObject> read_ground_truth(const std::string& records_path,
                                                 const std::string& polygons_path) {
  std::map<std::pair<int, int>, std::vector<Vec2>> polygons;
  {
    std::ifstream in(polygons_path);
    if (!in) throw std::runtime_error(polygons_path + ": cannot open for reading");
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ss(line);
      int frame = 0, id = 0;
      std::size_t count = 0;
      if (!(ss >> frame)) continue;
      if (!(ss >> id >> count)) {
        throw std::runtime_error(polygons_path + ":" + std::to_string(line_no) + ": malformed line");
      }
      std::vector<Vec2> poly(count);
      for (auto& v : poly) {
        if (!(ss >> v.x() >> v.y())) {
          throw std::runtime_error(polygons_path + ":" + std::to_string(line_no) +
                                   ": truncated vertex list");
        }
      }
      polygons[{frame, id}] = std::move(poly);
    }
  }

  std::vector<GroundTruthObject> truth;
  std::ifstream in(records_path);
  if (!in) throw std::runtime_error(records_path + ": cannot open for reading");
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    GroundTruthObject t;
    if (!(ss >> t.frame)) continue;
    if (!(ss >> t.object_id >> t.klass >> t.centroid_vehicle.x() >> t.centroid_vehicle.y() >>
          t.ground_distance)) {
      throw std::runtime_error(records_path + ":" + std::to_string(line_no) + ": malformed record");
    }
    const auto it = polygons.find({t.frame, t.object_id});
    if (it == polygons.end()) {
      throw std::runtime_error(records_path + ":" + std::to_string(line_no) +
                               ": no polygon for this object-frame");
    }
    t.polygon = it->second;
    truth.push_back(std::move(t));
  }
  return truth;
}

std::vector<Vec2> convex_hull(std::vector<Vec2> points) {
  std::sort(points.begin(), points.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  points.erase(std::unique(points.begin(), points.end(),
                           [](const Vec2& a, const Vec2& b) { return a == b; }),
               points.end());
  const std::size_t n = points.size();
  if (n < 3) return points;

  const auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Vec2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {  // lower
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], points[i]) <= 0.0) --k;
    hull[k++] = points[i];
  }
  for (std::size_t i = n - 1, lower = k + 1; i-- > 0;) {  // upper
    while (k >= lower && cross(hull[k - 2], hull[k - 1], points[i]) <= 0.0) --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);
  return hull;
}

SimulatedDataset simulate(const SceneSpec& spec) {
  spec.validate();

  SimulatedDataset data;
  data.spec = spec;
  const double dt = 1.0 / spec.frame_rate;

  for (int k = 0; k < spec.frames; ++k) {
    data.odometry.push_back({k * dt, spec.host_speed, spec.host_yaw_rate});
  }

  // Vehicle and camera poses per frame; the world frame is the vehicle frame
  // at t = 0.
  std::vector<Mat3> vehicle_rotations;
  std::vector<Vec3> vehicle_positions;
  for (int k = 0; k < spec.frames; ++k) {
    const PlanarPose pose = dead_reckon(data.odometry, 0.0, k * dt);
    const Mat3 r = yaw_to_world(pose.psi);
    vehicle_rotations.push_back(r);
    vehicle_positions.emplace_back(pose.x, pose.y, 0.0);
    data.camera_rotations.push_back(r * spec.mounting.rotation);
    data.camera_centers.push_back(vehicle_positions.back() + r * spec.mounting.position);
  }

  const FisheyeCalibration& calib = spec.calibration;
  FlowGrid layout;  // cell geometry only
  layout.cell_size = spec.cell_size;
  layout.image_width = calib.width;
  layout.image_height = calib.height;
  layout.cells_x = (calib.width + spec.cell_size - 1) / spec.cell_size;
  layout.cells_y = (calib.height + spec.cell_size - 1) / spec.cell_size;

  GaussianRng noise(spec.seed);

  for (int k = 0; k + 1 < spec.frames; ++k) {
    const double t_now = k * dt;
    FlowField flow = make_invalid_flow(calib.width, calib.height);
    PairCellTruth truth;
    truth.cells_x = layout.cells_x;
    truth.cells_y = layout.cells_y;
    truth.object_index.assign(static_cast<std::size_t>(layout.cells_x) * layout.cells_y, -1);
    truth.moving.assign(truth.object_index.size(), 0);

    const Mat3& cam_r0 = data.camera_rotations[k];
    const Mat3& cam_r1 = data.camera_rotations[k + 1];
    const Vec3& cam_c0 = data.camera_centers[k];
    const Vec3& cam_c1 = data.camera_centers[k + 1];

    for (int cy = 0; cy < layout.cells_y; ++cy) {
      for (int cx = 0; cx < layout.cells_x; ++cx) {
        const Vec2 center = layout.cell_center(cx, cy);
        if (!calib.pixel_in_fov(center)) continue;
        const Vec3 dir = cam_r0 * calib.unproject(center).vec();

        double best = std::numeric_limits<double>::infinity();
        int hit_object = -1;
        for (std::size_t j = 0; j < spec.objects.size(); ++j) {
          const auto& o = spec.objects[j];
          const Vec3 c = o.center + t_now * o.velocity;
          const auto hit = intersect_ray_box(cam_c0, dir, c - o.half_extents, c + o.half_extents);
          if (hit.hit && hit.distance < best) {
            best = hit.distance;
            hit_object = static_cast<int>(j);
          }
        }
        if (dir.z() < -1e-12) {
          const double s_road = -cam_c0.z() / dir.z();
          if (s_road < best) {
            best = s_road;
            hit_object = -1;
          }
        }
        Vec3 point = std::isfinite(best) ? Vec3(cam_c0 + best * dir)
                                         : Vec3(cam_c0 + spec.environment_distance * dir);

        const bool moving = hit_object >= 0 && spec.objects[hit_object].velocity.norm() > 0.0;
        if (moving) point += dt * spec.objects[hit_object].velocity;

        const auto pixel = calib.try_project(cam_r1.transpose() * (point - cam_c1));
        if (!pixel) continue;  // correspondence leaves the field of view
        const Vec2 f = *pixel - center;

        int x0, y0, x1, y1;
        layout.cell_span(cx, cy, &x0, &y0, &x1, &y1);
        for (int y = y0; y < y1; ++y) {
          for (int x = x0; x < x1; ++x) {
            const std::size_t i = flow.index(x, y);
            if (spec.noise_sigma > 0.0) {
              flow.du[i] = f.x() + spec.noise_sigma * noise();
              flow.dv[i] = f.y() + spec.noise_sigma * noise();
            } else {
              flow.du[i] = f.x();
              flow.dv[i] = f.y();
            }
          }
        }
        const std::size_t ci = truth.index(cx, cy);
        truth.object_index[ci] = static_cast<std::int16_t>(hit_object);
        truth.moving[ci] = moving ? 1 : 0;
      }
    }

    data.flows.push_back(std::move(flow));
    data.cell_truth.push_back(std::move(truth));

    // Image outline and ground position of every moving object this frame.
    for (std::size_t j = 0; j < spec.objects.size(); ++j) {
      const auto& o = spec.objects[j];
      if (o.velocity.norm() == 0.0) continue;
      const Vec3 c = o.center + t_now * o.velocity;

      std::vector<Vec2> pts;
      for (int axis = 0; axis < 3; ++axis) {
        const int u_axis = (axis + 1) % 3, v_axis = (axis + 2) % 3;
        for (int su = -1; su <= 1; su += 2) {
          for (int sv = -1; sv <= 1; sv += 2) {
            for (int step = 0; step <= 8; ++step) {
              Vec3 corner = Vec3::Zero();
              corner[axis] = -o.half_extents[axis] + step * o.half_extents[axis] / 4.0;
              corner[u_axis] = su * o.half_extents[u_axis];
              corner[v_axis] = sv * o.half_extents[v_axis];
              const auto px = calib.try_project(cam_r0.transpose() * (c + corner - cam_c0));
              if (px) pts.push_back(*px);
            }
          }
        }
      }
      const auto hull = convex_hull(std::move(pts));
      if (hull.size() < 3) continue;

      GroundTruthObject t;
      t.frame = k;
      t.object_id = static_cast<int>(j);
      t.klass = o.klass;
      const Vec3 in_vehicle = vehicle_rotations[k].transpose() * (c - vehicle_positions[k]);
      t.centroid_vehicle = Vec2(in_vehicle.x(), in_vehicle.y());
      t.ground_distance = t.centroid_vehicle.norm();
      t.polygon = hull;
      data.truth.push_back(std::move(t));
    }
  }
  return data;
}

void write_dataset(const SimulatedDataset& data, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  char name[32];
  for (std::size_t k = 0; k < data.flows.size(); ++k) {
    std::snprintf(name, sizeof(name), "flow_%06zu.smfl", k);
    write_flow(data.flows[k], (fs::path(dir) / name).string());
  }
  write_odometry(data.odometry, (fs::path(dir) / "odometry.txt").string());
  save_calibration(data.spec.calibration, (fs::path(dir) / "calibration.txt").string());
  save_mounting(data.spec.mounting, (fs::path(dir) / "mounting.txt").string());
  write_ground_truth(data.truth, (fs::path(dir) / "objects.txt").string(),
                     (fs::path(dir) / "polygons.txt").string());
  save_scene_spec(data.spec, (fs::path(dir) / "scene.txt").string());
}

}  // namespace smseg
