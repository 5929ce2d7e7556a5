#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "smseg/constraints.hpp"
#include "smseg/odometry.hpp"
#include "smseg/oracle.hpp"

using namespace smseg;

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec3 rotate_about_y(const Vec3& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return Vec3(c * v.x() + s * v.z(), v.y(), -s * v.x() + c * v.z());
}

// Geometry of a front camera that moved 1 m forward: previous center one
// meter behind the current one, no rotation.
FramePairGeometry forward_geometry() {
  FramePairGeometry g;
  g.rotation = Mat3::Identity();
  g.translation = Vec3(0.0, 0.0, -1.0);
  g.degenerate = false;
  g.epipole = UnitVec3(g.translation);
  return g;
}

}  // namespace

TEST_CASE("epipolar frame: normal of a ray/epipole pair, degenerate when aligned") {
  const UnitVec3 p(Vec3(0.0, 0.0, 1.0));
  const UnitVec3 e(Vec3(1.0, 0.0, 0.0));
  const EpipolarFrame f = make_epipolar_frame(p, e);
  REQUIRE_FALSE(f.degenerate);
  CHECK(f.normal.y() == doctest::Approx(1.0));  // z x x = y

  const EpipolarFrame g = make_epipolar_frame(p, UnitVec3(Vec3(0.0, 0.0, 1.0)));
  CHECK(g.degenerate);
  CHECK_FALSE(epipolar_deviation(g, e).has_value());
}

TEST_CASE("epipolar deviation: sine of the out-of-plane tilt") {
  const UnitVec3 p(Vec3(0.0, 0.0, 1.0));
  const UnitVec3 e(Vec3(1.0, 0.0, 0.0));
  const EpipolarFrame f = make_epipolar_frame(p, e);

  const double tilt = 5.0 * kPi / 180.0;
  const UnitVec3 q(Vec3(0.0, std::sin(tilt), std::cos(tilt)));
  const auto xi = epipolar_deviation(f, q);
  REQUIRE(xi.has_value());
  // sin(5 deg)
  CHECK(*xi == doctest::Approx(0.087155742747658166).epsilon(1e-12));

  const auto arc = geodesic_epipolar_deviation(f, q);
  REQUIRE(arc.has_value());
  CHECK(*arc == doctest::Approx(tilt).epsilon(1e-12));

  // An in-plane ray has no residual.
  const auto zero = epipolar_deviation(f, UnitVec3(Vec3(0.3, 0.0, 0.9)));
  CHECK(*zero == 0.0);
}

TEST_CASE("project_to_plane: removes the normal component, rejects the normal itself") {
  const UnitVec3 v(Vec3(1.0, 1.0, 1.0));
  const UnitVec3 w = project_to_plane(v, Vec3(0.0, 0.0, 1.0));
  CHECK(w.z() == 0.0);
  CHECK(w.x() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK_THROWS_AS(project_to_plane(UnitVec3(Vec3(0.0, 0.0, 1.0)), Vec3(0.0, 0.0, 1.0)),
                  std::domain_error);
}

TEST_CASE("positive depth: firing side of the sweep matches the reconstruction") {
  // Forward motion, epipole behind at -z; a static point at (2, 0, 4) from
  // the current camera, (2, 0, 5) from the previous one.
  const FramePairGeometry g = forward_geometry();
  const Vec3 x_static(2.0, 0.0, 4.0);
  const UnitVec3 p(x_static - g.translation);
  const UnitVec3 p_cur(x_static);

  const EpipolarFrame frame = make_epipolar_frame(p, *g.epipole);
  REQUIRE_FALSE(frame.degenerate);

  // Static: rays converge in front, no deviation.
  CHECK(positive_depth_deviation(p, p_cur, *g.epipole, frame.normal) == 0.0);

  // Rotating the current ray further from the epipole means more parallax: a
  // nearer point, still in front.
  const UnitVec3 nearer(rotate_about_y(p_cur.vec(), 0.02));
  CHECK(positive_depth_deviation(p, nearer, *g.epipole, frame.normal) == 0.0);

  // A current ray beyond the previous one (the zero-parallax limit at
  // infinite range) can only meet the previous ray behind the cameras.
  const UnitVec3 behind(rotate_about_y(p.vec(), -0.02));
  const double xi = positive_depth_deviation(p, behind, *g.epipole, frame.normal);
  CHECK(xi > 0.0);
  CHECK(xi == doctest::Approx(std::sin(0.02)).epsilon(1e-12));

  // The midpoint reconstruction agrees about the firing case.
  const MidpointResult mid = midpoint_triangulate(g.translation, p, Vec3::Zero(), behind);
  REQUIRE(mid.converged);
  CHECK((mid.s_prev <= 0.0 || mid.s_cur <= 0.0));
  const MidpointResult ok = midpoint_triangulate(g.translation, p, Vec3::Zero(), p_cur);
  REQUIRE(ok.converged);
  CHECK(ok.s_prev > 0.0);
  CHECK(ok.s_cur > 0.0);

  // A current ray on the far side of the epipole (the point would have had to
  // cross the baseline) also reconstructs behind. Both ends of the valid
  // segment are overshot here, and the reported deviation is the larger sine:
  // the full arc between the two rays, |crossed x p| = 18 / sqrt(580).
  const UnitVec3 crossed(Vec3(-2.0, 0.0, 4.0));
  const double xi_cross = positive_depth_deviation(p, crossed, *g.epipole, frame.normal);
  CHECK(xi_cross == doctest::Approx(18.0 / std::sqrt(580.0)).epsilon(1e-12));
  const MidpointResult mid_cross = midpoint_triangulate(g.translation, p, Vec3::Zero(), crossed);
  REQUIRE(mid_cross.converged);
  CHECK((mid_cross.s_prev <= 0.0 || mid_cross.s_cur <= 0.0));
}

TEST_CASE("midpoint triangulation: symmetric two-camera fixture") {
  // Cameras at the origin and (1,0,0), point at (0.5, 0, 2): both ray
  // parameters equal sqrt(0.25 + 4).
  const Vec3 point(0.5, 0.0, 2.0);
  const UnitVec3 d0(point);
  const UnitVec3 d1(point - Vec3(1.0, 0.0, 0.0));
  const MidpointResult r = midpoint_triangulate(Vec3::Zero(), d0, Vec3(1.0, 0.0, 0.0), d1);
  REQUIRE(r.converged);
  const double expected = std::sqrt(4.25);
  CHECK(r.s_prev == doctest::Approx(expected).epsilon(1e-12));
  CHECK(r.s_cur == doctest::Approx(expected).epsilon(1e-12));
  CHECK((r.point - point).norm() < 1e-12);
}

TEST_CASE("midpoint triangulation: parallel rays do not converge") {
  const UnitVec3 d(Vec3(0.0, 0.0, 1.0));
  const MidpointResult r = midpoint_triangulate(Vec3(1.0, 0.0, 0.0), d, Vec3::Zero(), d);
  CHECK_FALSE(r.converged);
}

TEST_CASE("road scale: distance along the ray to the road plane") {
  const UnitVec3 horizon(Vec3(0.0, 1.0, 0.0));
  // Ray 60 degrees off the road normal: scale = height / cos(60) = 2 * height.
  const UnitVec3 ray(Vec3(0.0, 0.5, std::sqrt(0.75)));
  const auto scale = road_scale(ray, horizon, 1.0);
  REQUIRE(scale.has_value());
  CHECK(*scale == doctest::Approx(2.0).epsilon(1e-12));

  CHECK_FALSE(road_scale(UnitVec3(Vec3(0.0, -0.1, 1.0)), horizon, 1.0).has_value());
  CHECK_FALSE(road_scale(UnitVec3(Vec3(0.0, 0.0, 1.0)), horizon, 1.0).has_value());
}

TEST_CASE("road deviations: sweep short of the road prediction fires height") {
  const ConstraintThresholds thresholds;
  const Vec3 n(0.0, 1.0, 0.0);
  const UnitVec3 p(Vec3(1.0, 0.0, 1.0));
  // Positive rotation about +y is a positive signed arc from p.
  const UnitVec3 observed(rotate_about_y(p.vec(), 0.03));
  const UnitVec3 road(rotate_about_y(p.vec(), 0.05));

  const RoadDeviations rd = road_deviations(p, observed, road, n, thresholds);
  CHECK(rd.antiparallel == 0.0);
  CHECK(rd.height == doctest::Approx(std::sin(0.02) - 1e-3).epsilon(1e-9));
}

TEST_CASE("road deviations: sweep past the road prediction fires antiparallel") {
  const ConstraintThresholds thresholds;
  const Vec3 n(0.0, 1.0, 0.0);
  const UnitVec3 p(Vec3(1.0, 0.0, 1.0));
  const UnitVec3 observed(rotate_about_y(p.vec(), 0.05));
  const UnitVec3 road(rotate_about_y(p.vec(), 0.03));

  const RoadDeviations rd = road_deviations(p, observed, road, n, thresholds);
  CHECK(rd.height == 0.0);
  CHECK(rd.antiparallel == doctest::Approx(std::sin(0.02) - 1e-3).epsilon(1e-9));
}

TEST_CASE("road deviations: opposite sweep directions and matched arcs stay silent") {
  const ConstraintThresholds thresholds;
  const Vec3 n(0.0, 1.0, 0.0);
  const UnitVec3 p(Vec3(1.0, 0.0, 1.0));

  const RoadDeviations opposite = road_deviations(
      p, UnitVec3(rotate_about_y(p.vec(), -0.03)), UnitVec3(rotate_about_y(p.vec(), 0.05)), n,
      thresholds);
  CHECK(opposite.height == 0.0);
  CHECK(opposite.antiparallel == 0.0);

  const UnitVec3 same(rotate_about_y(p.vec(), 0.04));
  const RoadDeviations matched = road_deviations(p, same, same, n, thresholds);
  CHECK(matched.height == 0.0);
  CHECK(matched.antiparallel == 0.0);
}

TEST_CASE("road deviations: the rejection band absorbs small gaps") {
  const ConstraintThresholds thresholds;  // lambda 1e-3
  const Vec3 n(0.0, 1.0, 0.0);
  const UnitVec3 p(Vec3(1.0, 0.0, 1.0));
  const UnitVec3 observed(rotate_about_y(p.vec(), 0.030));
  const UnitVec3 road(rotate_about_y(p.vec(), 0.0305));  // gap 5e-4 < lambda

  const RoadDeviations rd = road_deviations(p, observed, road, n, thresholds);
  CHECK(rd.height == 0.0);
  CHECK(rd.antiparallel == 0.0);
}

TEST_CASE("three-view deviation: a static point closes the range transport") {
  // Collinear forward motion, all frames in the middle camera's coordinates.
  const Vec3 point(1.5, -0.4, 6.0);
  const Vec3 c_prev(0.0, 0.0, -1.2);
  const Vec3 c_next(0.0, 0.0, 0.9);

  ThreeViewObservation obs{UnitVec3(point - c_prev), UnitVec3(point),
                           UnitVec3(point - c_next), c_prev, -c_next};
  const auto xi = three_view_deviation(obs);
  REQUIRE(xi.has_value());
  CHECK(*xi < 1e-12);
}

TEST_CASE("three-view deviation: consistent under a turning camera path") {
  // Non-collinear centers; everything stays in one epipolar plane, where the
  // range transport is exact.
  const Vec3 point(2.0, 0.0, 7.0);
  const Vec3 c_prev(0.4, 0.0, -1.0);
  const Vec3 c_next(-0.3, 0.0, 1.1);

  ThreeViewObservation obs{UnitVec3(point - c_prev), UnitVec3(point),
                           UnitVec3(point - c_next), c_prev, -c_next};
  const auto xi = three_view_deviation(obs);
  REQUIRE(xi.has_value());
  CHECK(*xi < 1e-10);
}

TEST_CASE("three-view deviation: depth change between the pairs is flagged") {
  const Vec3 c_prev(0.0, 0.0, -1.2);
  const Vec3 c_next(0.0, 0.0, 0.9);
  // The point observed by the last camera is 1.5 m nearer than the first
  // pair's triangulation predicts.
  const Vec3 point(1.5, -0.4, 6.0);
  const Vec3 moved = point + Vec3(0.0, 0.0, -1.5);

  ThreeViewObservation obs{UnitVec3(point - c_prev), UnitVec3(point),
                           UnitVec3(moved - c_next), c_prev, -c_next};
  const auto xi = three_view_deviation(obs);
  REQUIRE(xi.has_value());
  CHECK(*xi > 1e-3);
}

TEST_CASE("three-view deviation: degenerate inputs") {
  const Vec3 point(1.5, -0.4, 6.0);
  ThreeViewObservation zero_baseline{UnitVec3(point), UnitVec3(point), UnitVec3(point),
                                     Vec3::Zero(), Vec3(0.0, 0.0, -1.0)};
  CHECK_THROWS_AS(three_view_deviation(zero_baseline), std::invalid_argument);

  // A ray parallel to the first baseline has no epipolar plane.
  ThreeViewObservation on_axis{UnitVec3(Vec3(0.0, 0.0, 1.0)), UnitVec3(Vec3(0.0, 0.0, 1.0)),
                               UnitVec3(Vec3(0.0, 0.0, 1.0)), Vec3(0.0, 0.0, -1.0),
                               Vec3(0.0, 0.0, -1.0)};
  CHECK_FALSE(three_view_deviation(on_axis).has_value());
}

TEST_CASE("static degenerate residual: rotation-compensated rays must coincide") {
  const UnitVec3 horizon(Vec3(0.0, 1.0, 0.0));
  // Ray in the horizon plane, perpendicular to the rotation axis, so the
  // rotation angle is exactly the angular separation.
  const UnitVec3 p(Vec3(0.2, 0.0, 1.0));
  CHECK(static_degenerate_deviation(p, p, horizon, 1.0, 0.02) == 0.0);

  const UnitVec3 q(rotate_about_y(p.vec(), 0.05));
  CHECK(static_degenerate_deviation(p, q, horizon, 1.0, 0.02) ==
        doctest::Approx(std::sin(0.05)).epsilon(1e-9));
}

TEST_CASE("static degenerate residual: road band forgives small ground displacement") {
  const UnitVec3 horizon(Vec3(0.0, 1.0, 0.0));
  const double height = 1.0;
  // Two rays at ground points 5 m ahead, 1 cm apart laterally.
  const UnitVec3 p(Vec3(0.0, height, 5.0));
  const UnitVec3 q_near(Vec3(0.01, height, 5.0));
  CHECK(static_degenerate_deviation(p, q_near, horizon, height, 0.02) == 0.0);

  // 10 cm apart: outside the 2 cm band, the angular residual comes back.
  const UnitVec3 q_far(Vec3(0.10, height, 5.0));
  CHECK(static_degenerate_deviation(p, q_far, horizon, height, 0.02) > 0.0);
}

TEST_CASE("evaluate_correspondence: ray through the epipole decides nothing") {
  const FramePairGeometry g = forward_geometry();
  const ConstraintThresholds thresholds;
  const UnitVec3 horizon(Vec3(0.0, 1.0, 0.0));
  const UnitVec3 on_axis(Vec3(0.0, 0.0, 1.0));  // parallel to the baseline

  const ConstraintDeviations d = evaluate_correspondence(
      on_axis, UnitVec3(Vec3(0.01, 0.0, 1.0)), *g.epipole, g.translation, horizon, 1.0, thresholds);
  CHECK_FALSE(d.epipolar.has_value());
  CHECK_FALSE(d.depth.has_value());
  CHECK_FALSE(d.height.has_value());
  CHECK_FALSE(d.antiparallel.has_value());
  CHECK_FALSE(d.three_view.has_value());
}

TEST_CASE("evaluate_correspondence: above the horizon only the sphere constraints apply") {
  const FramePairGeometry g = forward_geometry();
  const ConstraintThresholds thresholds;
  const UnitVec3 horizon(Vec3(0.0, 1.0, 0.0));

  // A static point above the camera: y < 0 means above the horizon.
  const Vec3 x_static(1.0, -2.0, 8.0);
  const ConstraintDeviations d =
      evaluate_correspondence(UnitVec3(x_static - g.translation), UnitVec3(x_static), *g.epipole,
                              g.translation, horizon, 1.0, thresholds);
  REQUIRE(d.epipolar.has_value());
  CHECK(*d.epipolar < 1e-12);
  REQUIRE(d.depth.has_value());
  CHECK(*d.depth == 0.0);
  CHECK_FALSE(d.height.has_value());
  CHECK_FALSE(d.antiparallel.has_value());
}

TEST_CASE("evaluate_correspondence: a static road point satisfies all four constraints") {
  const FramePairGeometry g = forward_geometry();
  const ConstraintThresholds thresholds;
  const UnitVec3 horizon(Vec3(0.0, 1.0, 0.0));
  const double height = 1.0;

  const Vec3 ground(0.5, height, 5.0);  // on the road, 5 m ahead
  const ConstraintDeviations d =
      evaluate_correspondence(UnitVec3(ground - g.translation), UnitVec3(ground), *g.epipole,
                              g.translation, horizon, height, thresholds);
  REQUIRE(d.epipolar.has_value());
  CHECK(*d.epipolar < 1e-12);
  REQUIRE(d.depth.has_value());
  CHECK(*d.depth == 0.0);
  REQUIRE(d.height.has_value());
  CHECK(*d.height == 0.0);
  REQUIRE(d.antiparallel.has_value());
  CHECK(*d.antiparallel == 0.0);
}

TEST_CASE("evaluate_correspondence: receding ground feature reconstructs below the road") {
  const FramePairGeometry g = forward_geometry();
  const ConstraintThresholds thresholds;
  const UnitVec3 horizon(Vec3(0.0, 1.0, 0.0));
  const double height = 1.0;

  // Previous observation on the road at z=5; by the current frame the
  // feature fled 0.6 m forward while the camera advanced a full metre. The
  // ray still sweeps away from the focus of expansion, but slower than any
  // static road point could, so the apparent intersection lands beyond the
  // road surface.
  const Vec3 x_prev(0.5, height, 5.0);
  const Vec3 x_cur = x_prev + Vec3(0.0, 0.0, 0.6);
  const ConstraintDeviations d =
      evaluate_correspondence(UnitVec3(x_prev - g.translation), UnitVec3(x_cur), *g.epipole,
                              g.translation, horizon, height, thresholds);
  REQUIRE(d.height.has_value());
  CHECK(*d.height > 0.0);
  CHECK(*d.antiparallel == 0.0);
  CHECK(*d.depth == 0.0);

  // The reconstruction oracle reaches the same verdict independently.
  CHECK(oracle_classify(UnitVec3(x_prev - g.translation), UnitVec3(x_cur), g, horizon, height,
                        thresholds) == OracleLabel::below_road);
}

TEST_CASE("evaluate_correspondence: oncoming ground feature floats above the road") {
  const FramePairGeometry g = forward_geometry();
  const ConstraintThresholds thresholds;
  const UnitVec3 horizon(Vec3(0.0, 1.0, 0.0));
  const double height = 1.0;

  const Vec3 x_prev(0.5, height, 6.5);
  const Vec3 x_cur = x_prev + Vec3(0.0, 0.0, -1.5);  // rushing toward the camera
  const ConstraintDeviations d =
      evaluate_correspondence(UnitVec3(x_prev - g.translation), UnitVec3(x_cur), *g.epipole,
                              g.translation, horizon, height, thresholds);
  REQUIRE(d.antiparallel.has_value());
  CHECK(*d.antiparallel > 0.0);
  CHECK(*d.height == 0.0);
  CHECK(*d.depth == 0.0);

  CHECK(oracle_classify(UnitVec3(x_prev - g.translation), UnitVec3(x_cur), g, horizon, height,
                        thresholds) == OracleLabel::above_road_excess);
}

TEST_CASE("evaluate_correspondence: epipolar and depth residuals ignore the baseline scale") {
  const ConstraintThresholds thresholds;
  const UnitVec3 horizon(Vec3(0.0, 1.0, 0.0));
  const UnitVec3 p(Vec3(0.4, 0.2, 1.0));
  const UnitVec3 q(Vec3(0.38, 0.26, 1.0));

  FramePairGeometry g = forward_geometry();
  const ConstraintDeviations base =
      evaluate_correspondence(p, q, *g.epipole, g.translation, horizon, 1.0, thresholds);
  for (double k : {0.1, 10.0}) {
    FramePairGeometry scaled = g;
    scaled.translation *= k;
    const ConstraintDeviations d =
        evaluate_correspondence(p, q, *scaled.epipole, scaled.translation, horizon, 1.0, thresholds);
    CAPTURE(k);
    CHECK(std::abs(*d.epipolar - *base.epipolar) <= 1e-12);
    CHECK(std::abs(*d.depth - *base.depth) <= 1e-12);
  }
}
