#pragma once

#include <string>
#include <vector>

#include "smseg/io.hpp"
#include "smseg/simulator.hpp"
#include "smseg/types.hpp"

namespace smseg {

// Even-odd rasterization of a polygon given in pixel coordinates: a pixel is
// covered when its integer center is inside. Crossings exactly on a center
// resolve half-open (left edge in, right edge out), so areas are
// bit-reproducible.
std::vector<std::uint8_t> rasterize_polygon(const std::vector<Vec2>& vertices, int width,
                                            int height);

// Overlap scores of one object in one frame. tpr counts the object's own
// pixels; iou additionally charges the frame-wide false positives.
struct ObjectScore {
  int frame = 0;
  int object_id = 0;
  std::string klass;
  bool in_range = false;
  long tp = 0;
  long fn = 0;
  double tpr = 0.0;
  double iou = 0.0;
  bool detected = false;
};

struct FrameScore {
  int frame = 0;
  long fp_pixels = 0;     // mask pixels outside every object outline
  long total_pixels = 0;  // image area
  double fp_ratio = 0.0;
  std::vector<ObjectScore> objects;
};

// Scores one mask image against the outlines of that frame. `objects` must
// all belong to the same frame as the mask.
FrameScore score_frame(const ImageU8& mask, const std::vector<GroundTruthObject>& objects,
                       double range_gate);

struct ClassSummary {
  std::string klass;
  int object_frames = 0;
  int in_range = 0;
  int detected = 0;          // among in-range object-frames
  double detection_rate = 0.0;
  double mean_tpr = 0.0;     // over in-range object-frames
  double mean_iou = 0.0;
};

struct EvalSummary {
  std::vector<FrameScore> frames;
  std::vector<ClassSummary> classes;
  long fp_pixels = 0;
  long total_pixels = 0;
  double fp_ratio = 0.0;
};

EvalSummary aggregate_scores(std::vector<FrameScore> frames);

// Detection rate binned over the object centroid's ground position in the
// vehicle frame: rows run from +extent (forward, top) to -extent, columns
// from +extent (left) to -extent, bins without observations are NaN.
struct RangeMapSpec {
  double bin_size = 0.5;  // m
  double extent = 16.0;   // half width of the map, m
};

GridF32 detection_range_map(const std::vector<FrameScore>& frames,
                            const std::vector<GroundTruthObject>& truth,
                            const RangeMapSpec& spec);

void write_report(const EvalSummary& summary, const std::string& path);

}  // namespace smseg
