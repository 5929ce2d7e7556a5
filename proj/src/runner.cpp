#include "smseg/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "smseg/config_text.hpp"

namespace smseg {

namespace fs = std::filesystem;

namespace {

// Indexed files of the form <prefix>NNNNNN<suffix> within a directory.
std::map<int, fs::path> scan_indexed(const std::string& dir, const std::string& prefix,
                                     const std::string& suffix) {
  std::map<int, fs::path> found;
  if (!fs::is_directory(dir)) throw std::runtime_error(dir + ": not a directory");
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.size() != prefix.size() + 6 + suffix.size()) continue;
    if (name.compare(0, prefix.size(), prefix) != 0) continue;
    if (name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
    const std::string digits = name.substr(prefix.size(), 6);
    if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      continue;
    }
    found[std::stoi(digits)] = entry.path();
  }
  return found;
}

std::string indexed_name(const std::string& prefix, int index, const std::string& suffix) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%06d%s", prefix.c_str(), index, suffix.c_str());
  return buf;
}

std::string config_block(const SegmentOptions& o) {
  std::ostringstream out;
  out << "flow_dir " << o.flow_dir << '\n';
  out << "calibration " << o.calibration_path << '\n';
  out << "mounting " << o.mounting_path << '\n';
  out << "odometry " << o.odometry_path << '\n';
  out << "cell_size " << o.params.cell_size << '\n';
  out << "threshold " << format_double(o.params.threshold) << '\n';
  out << "motion_floor " << format_double(o.params.motion_floor) << '\n';
  out << "frame_rate " << format_double(o.params.frame_rate) << '\n';
  out << "weights " << format_double(o.params.weights.epipolar) << ' '
      << format_double(o.params.weights.depth) << ' ' << format_double(o.params.weights.height)
      << ' ' << format_double(o.params.weights.antiparallel) << ' '
      << format_double(o.params.weights.three_view) << '\n';
  out << "lambda_height " << format_double(o.params.thresholds.lambda_height) << '\n';
  out << "lambda_antiparallel " << format_double(o.params.thresholds.lambda_antiparallel) << '\n';
  out << "lambda_static " << format_double(o.params.thresholds.lambda_static) << '\n';
  out << "execution " << (o.execution == Execution::serial ? "serial" : "parallel") << '\n';
  return out.str();
}

}  // namespace

SegmentReport run_segmentation(const SegmentOptions& options) {
  options.params.weights.validate();
  const FisheyeCalibration calib = load_calibration(options.calibration_path);
  const MountingPose mount = load_mounting(options.mounting_path);
  const auto odometry = read_odometry(options.odometry_path);

  const auto flows = scan_indexed(options.flow_dir, "flow_", ".smfl");
  if (flows.empty()) throw std::runtime_error(options.flow_dir + ": no flow_NNNNNN.smfl files");

  fs::create_directories(options.output_dir);

  SegmentReport report;
  const std::string config = config_block(options);
  report.config_hash = fnv1a_hash(config);

  const double dt = 1.0 / options.params.frame_rate;
  const int first = flows.begin()->first;
  const int last = flows.rbegin()->first;

  for (int k = first; k <= last; ++k) {
    PairOutcome outcome;
    outcome.pair = k;

    const auto it = flows.find(k);
    if (it == flows.end()) {
      outcome.skip_reason = "missing-flow";
      std::cerr << "warning: pair " << k << " skipped: no flow file\n";
      report.pairs.push_back(outcome);
      continue;
    }

    PlanarPose delta;
    try {
      delta = dead_reckon(odometry, k * dt, (k + 1) * dt);
    } catch (const std::exception& e) {
      outcome.skip_reason = "odometry-gap";
      std::cerr << "warning: pair " << k << " skipped: " << e.what() << '\n';
      report.pairs.push_back(outcome);
      continue;
    }

    const FlowField flow = read_flow(it->second.string());
    const FlowGrid grid = average_flow(flow, options.params.cell_size);
    const FramePairGeometry geometry = camera_motion(delta, mount, options.params.motion_floor);
    const PairEvaluation eval =
        evaluate_pair(grid, calib, geometry, options.params, options.execution);
    const SegmentationMask mask = segment(eval.likelihood, options.params.threshold);

    const fs::path out_dir(options.output_dir);
    write_pgm(render_mask(mask), (out_dir / indexed_name("mask_", k, ".pgm")).string());
    if (options.write_heatmaps) {
      write_pgm(render_heatmap(eval.likelihood), (out_dir / indexed_name("heat_", k, ".pgm")).string());
    }
    if (options.write_likelihoods) {
      write_grid(likelihood_to_grid(eval.likelihood),
                 (out_dir / indexed_name("likelihood_", k, ".smlg")).string());
    }

    outcome.ok = true;
    outcome.degenerate = eval.degenerate;
    outcome.stats = eval.stats;
    ++report.pairs_ok;
    report.pairs.push_back(outcome);
  }

  std::ofstream manifest(fs::path(options.output_dir) / "manifest.txt");
  if (!manifest) throw std::runtime_error(options.output_dir + ": cannot write manifest.txt");
  manifest << "config_hash " << report.config_hash << '\n';
  manifest << config;
  manifest << "pairs " << report.pairs.size() << '\n';
  for (const auto& p : report.pairs) {
    if (p.ok) {
      manifest << "pair " << p.pair << " status ok cells " << p.stats.valid_cells << " lifted "
               << p.stats.lifted << " dropped_fov " << p.stats.dropped_fov << " degenerate "
               << (p.degenerate ? 1 : 0) << '\n';
    } else {
      manifest << "pair " << p.pair << " status skipped reason " << p.skip_reason << '\n';
    }
  }
  if (!manifest) throw std::runtime_error(options.output_dir + ": manifest write failed");
  return report;
}

EvalSummary run_evaluation(const EvaluateOptions& options) {
  const auto truth = read_ground_truth(options.truth_records, options.truth_polygons);
  std::map<int, std::vector<GroundTruthObject>> by_frame;
  for (const auto& t : truth) by_frame[t.frame].push_back(t);

  const auto masks = scan_indexed(options.masks_dir, "mask_", ".pgm");
  if (masks.empty()) throw std::runtime_error(options.masks_dir + ": no mask_NNNNNN.pgm files");

  std::vector<FrameScore> frames;
  for (const auto& [k, path] : masks) {
    const ImageU8 mask = read_pgm(path.string());
    const auto it = by_frame.find(k);
    static const std::vector<GroundTruthObject> none;
    FrameScore fs = score_frame(mask, it != by_frame.end() ? it->second : none, options.range_gate);
    fs.frame = k;
    frames.push_back(std::move(fs));
  }

  EvalSummary summary = aggregate_scores(std::move(frames));
  if (!options.report_path.empty()) write_report(summary, options.report_path);
  if (!options.range_map_path.empty()) {
    write_grid(detection_range_map(summary.frames, truth, options.range_map),
               options.range_map_path);
  }
  return summary;
}

}  // namespace smseg
