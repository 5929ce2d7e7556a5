#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "smseg/flow_grid.hpp"

using namespace smseg;

namespace {

FlowField constant_flow(int w, int h, double du, double dv) {
  FlowField f = make_invalid_flow(w, h);
  for (std::size_t i = 0; i < f.du.size(); ++i) {
    f.du[i] = du;
    f.dv[i] = dv;
  }
  return f;
}

}  // namespace

TEST_CASE("average_flow: constant field pools to the constant") {
  const FlowGrid g = average_flow(constant_flow(10, 10, 1.5, -2.0), 5);
  REQUIRE(g.cells_x == 2);
  REQUIRE(g.cells_y == 2);
  for (int cy = 0; cy < 2; ++cy) {
    for (int cx = 0; cx < 2; ++cx) {
      CHECK(g.valid[g.index(cx, cy)] == 1);
      CHECK(g.mean[g.index(cx, cy)].x() == 1.5);
      CHECK(g.mean[g.index(cx, cy)].y() == -2.0);
    }
  }
}

TEST_CASE("average_flow: cell validity needs at least half the covered pixels") {
  // 5x5 cell: 12 valid pixels of 25 fails the majority test, 13 passes.
  for (int valid_count : {12, 13}) {
    FlowField f = make_invalid_flow(5, 5);
    for (int i = 0; i < valid_count; ++i) {
      f.du[i] = 1.0;
      f.dv[i] = 0.0;
    }
    const FlowGrid g = average_flow(f, 5);
    CAPTURE(valid_count);
    CHECK(static_cast<int>(g.valid[0]) == (valid_count == 13 ? 1 : 0));
  }
}

TEST_CASE("average_flow: mean is taken over the valid pixels only") {
  FlowField f = make_invalid_flow(2, 2);
  f.du[0] = 1.0;
  f.dv[0] = 4.0;
  f.du[1] = 3.0;
  f.dv[1] = 8.0;
  // two of four pixels valid: exactly half, still a valid cell
  const FlowGrid g = average_flow(f, 2);
  REQUIRE(g.valid[0] == 1);
  CHECK(g.mean[0].x() == 2.0);
  CHECK(g.mean[0].y() == 6.0);
}

TEST_CASE("cell geometry: border cells shrink to the image edge") {
  const FlowGrid g = average_flow(constant_flow(9, 7, 0.0, 0.0), 4);
  REQUIRE(g.cells_x == 3);
  REQUIRE(g.cells_y == 2);

  int x0, y0, x1, y1;
  g.cell_span(0, 0, &x0, &y0, &x1, &y1);
  CHECK(x0 == 0);
  CHECK(x1 == 4);
  CHECK(y1 == 4);

  g.cell_span(2, 1, &x0, &y0, &x1, &y1);  // 1-pixel-wide, 3-pixel-tall corner
  CHECK(x0 == 8);
  CHECK(x1 == 9);
  CHECK(y0 == 4);
  CHECK(y1 == 7);

  // Center of the full top-left cell: pixels 0..3 -> 1.5.
  CHECK(g.cell_center(0, 0) == Vec2(1.5, 1.5));
  // Center of the corner cell: single column x=8, rows 4..6.
  CHECK(g.cell_center(2, 1) == Vec2(8.0, 5.0));
}

TEST_CASE("average_flow: rejects nonsense arguments") {
  CHECK_THROWS_AS(average_flow(make_invalid_flow(4, 4), 0), std::invalid_argument);
  CHECK_THROWS_AS(average_flow(FlowField{}, 5), std::invalid_argument);
}
