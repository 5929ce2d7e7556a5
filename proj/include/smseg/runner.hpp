#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smseg/evaluation.hpp"
#include "smseg/pipeline.hpp"

namespace smseg {

// Batch segmentation over a directory of flow files (flow_NNNNNN.smfl). Pair
// k spans the odometry window [k, k+1] / frame_rate.
struct SegmentOptions {
  std::string flow_dir;
  std::string calibration_path;
  std::string mounting_path;
  std::string odometry_path;
  std::string output_dir;
  PipelineParams params;
  Execution execution = Execution::parallel;
  bool write_heatmaps = true;
  bool write_likelihoods = true;
};

struct PairOutcome {
  int pair = 0;
  bool ok = false;
  std::string skip_reason;  // "missing-flow" or "odometry-gap" when not ok
  bool degenerate = false;
  LiftStats stats;
};

struct SegmentReport {
  std::uint64_t config_hash = 0;
  std::vector<PairOutcome> pairs;
  int pairs_ok = 0;
};

// Writes mask_NNNNNN.pgm (and optionally heat_NNNNNN.pgm,
// likelihood_NNNNNN.smlg) per pair plus manifest.txt into output_dir. Pairs
// with a missing flow file or an uncovered odometry window are skipped with a
// warning on stderr; everything else is an error. Throws std::runtime_error
// when no flow files are found.
SegmentReport run_segmentation(const SegmentOptions& options);

// Scores mask_NNNNNN.pgm images against ground-truth outlines.
struct EvaluateOptions {
  std::string masks_dir;
  std::string truth_records;
  std::string truth_polygons;
  std::string report_path;
  std::string range_map_path;  // empty: no range map
  double range_gate = 8.0;     // m, objects farther than this are informative only
  RangeMapSpec range_map;
};

EvalSummary run_evaluation(const EvaluateOptions& options);

}  // namespace smseg
