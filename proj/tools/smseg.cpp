// Command-line front end: synthesize datasets, segment flow directories,
// score masks against ground truth.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "smseg/config_text.hpp"
#include "smseg/runner.hpp"
#include "smseg/simulator.hpp"

namespace {

int run_simulate(const std::string& preset, const std::string& spec_path, const std::string& out_dir,
                 std::uint64_t seed, bool seed_set, double noise, bool noise_set, int frames,
                 bool frames_set) {
  smseg::SceneSpec spec =
      spec_path.empty() ? smseg::preset_scene(preset) : smseg::load_scene_spec(spec_path);
  if (seed_set) spec.seed = seed;
  if (noise_set) spec.noise_sigma = noise;
  if (frames_set) spec.frames = frames;

  const smseg::SimulatedDataset data = smseg::simulate(spec);
  smseg::write_dataset(data, out_dir);
  std::cout << "scene " << spec.name << ": " << data.flows.size() << " flow pairs, "
            << data.truth.size() << " object-frame outlines -> " << out_dir << '\n';
  return 0;
}

void apply_segment_config(const std::string& path, smseg::SegmentOptions* o) {
  const smseg::KeyValueFile kv = smseg::KeyValueFile::load(path);
  if (kv.has("flow_dir")) o->flow_dir = kv.get_string("flow_dir");
  if (kv.has("calibration")) o->calibration_path = kv.get_string("calibration");
  if (kv.has("mounting")) o->mounting_path = kv.get_string("mounting");
  if (kv.has("odometry")) o->odometry_path = kv.get_string("odometry");
  if (kv.has("output_dir")) o->output_dir = kv.get_string("output_dir");
  auto& p = o->params;
  p.cell_size = static_cast<int>(kv.get_int_or("cell_size", p.cell_size));
  p.threshold = kv.get_double_or("threshold", p.threshold);
  p.motion_floor = kv.get_double_or("motion_floor", p.motion_floor);
  p.frame_rate = kv.get_double_or("frame_rate", p.frame_rate);
  p.jobs = static_cast<int>(kv.get_int_or("jobs", p.jobs));
  if (kv.has("weights")) {
    const auto w = kv.get_doubles("weights", 5);
    p.weights = {w[0], w[1], w[2], w[3], w[4]};
  }
  p.thresholds.lambda_height = kv.get_double_or("lambda_height", p.thresholds.lambda_height);
  p.thresholds.lambda_antiparallel =
      kv.get_double_or("lambda_antiparallel", p.thresholds.lambda_antiparallel);
  p.thresholds.lambda_static = kv.get_double_or("lambda_static", p.thresholds.lambda_static);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spherical motion segmentation for fisheye cameras"};
  app.require_subcommand(1);

  // --- simulate ---
  auto* sim = app.add_subcommand("simulate", "Render a synthetic dataset");
  std::string preset = "static-world", spec_path, sim_out = "dataset";
  std::uint64_t seed = 1;
  double noise = 0.0;
  int frames = 0;
  sim->add_option("--preset", preset, "Built-in scene")
      ->check(CLI::IsMember(smseg::preset_names()));
  sim->add_option("--spec", spec_path, "Scene description file (overrides --preset)")
      ->check(CLI::ExistingFile);
  sim->add_option("--out", sim_out, "Output directory")->required();
  auto* seed_opt = sim->add_option("--seed", seed, "Noise seed");
  auto* noise_opt = sim->add_option("--noise", noise, "Per-pixel flow noise sigma, px");
  auto* frames_opt = sim->add_option("--frames", frames, "Number of frames");

  // --- segment ---
  auto* seg = app.add_subcommand("segment", "Segment a directory of flow fields");
  std::string config_path;
  smseg::SegmentOptions seg_opts;
  std::vector<double> weights;
  bool serial = false, no_heat = false, no_likelihood = false;
  seg->add_option("--config", config_path, "Key/value options file")->check(CLI::ExistingFile);
  auto* o_flow = seg->add_option("--flow-dir", seg_opts.flow_dir, "Directory of flow_NNNNNN.smfl");
  auto* o_calib = seg->add_option("--calibration", seg_opts.calibration_path, "Calibration file");
  auto* o_mount = seg->add_option("--mounting", seg_opts.mounting_path, "Mounting pose file");
  auto* o_odo = seg->add_option("--odometry", seg_opts.odometry_path, "Odometry log");
  auto* o_out = seg->add_option("--out", seg_opts.output_dir, "Output directory");
  auto* o_cell = seg->add_option("--cell-size", seg_opts.params.cell_size, "Pooling cell size, px");
  auto* o_thresh = seg->add_option("--threshold", seg_opts.params.threshold, "Moving threshold");
  auto* o_floor =
      seg->add_option("--motion-floor", seg_opts.params.motion_floor, "Degenerate baseline, m");
  auto* o_fps = seg->add_option("--fps", seg_opts.params.frame_rate, "Frame rate, Hz");
  auto* o_jobs = seg->add_option("--jobs", seg_opts.params.jobs, "Worker threads (0 = default)");
  auto* o_weights =
      seg->add_option("--weights", weights, "Fusion weights: epipolar depth height antiparallel 3v")
          ->expected(5);
  auto* o_lh = seg->add_option("--lambda-height", seg_opts.params.thresholds.lambda_height,
                               "Below-road rejection band");
  auto* o_lp =
      seg->add_option("--lambda-antiparallel", seg_opts.params.thresholds.lambda_antiparallel,
                      "Above-road rejection band");
  auto* o_ls = seg->add_option("--lambda-static", seg_opts.params.thresholds.lambda_static,
                               "Static-camera road band, m");
  seg->add_flag("--serial", serial, "Use the serial reference path");
  seg->add_flag("--no-heatmaps", no_heat, "Skip heat_NNNNNN.pgm");
  seg->add_flag("--no-likelihoods", no_likelihood, "Skip likelihood_NNNNNN.smlg");

  // --- evaluate ---
  auto* ev = app.add_subcommand("evaluate", "Score masks against ground truth");
  smseg::EvaluateOptions ev_opts;
  ev->add_option("--masks", ev_opts.masks_dir, "Directory of mask_NNNNNN.pgm")->required();
  ev->add_option("--truth", ev_opts.truth_records, "Object records file")->required();
  ev->add_option("--polygons", ev_opts.truth_polygons, "Object outline file")->required();
  ev->add_option("--report", ev_opts.report_path, "Report output path");
  ev->add_option("--range-map", ev_opts.range_map_path, "Detection range map output (.smlg)");
  ev->add_option("--range-gate", ev_opts.range_gate, "Scoring distance gate, m");
  ev->add_option("--bin-size", ev_opts.range_map.bin_size, "Range map bin, m");
  ev->add_option("--extent", ev_opts.range_map.extent, "Range map half extent, m");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      return run_simulate(preset, spec_path, sim_out, seed, seed_opt->count() > 0, noise,
                          noise_opt->count() > 0, frames, frames_opt->count() > 0);
    }

    if (seg->parsed()) {
      if (!config_path.empty()) {
        // Command-line values override the config file: reapply them on top.
        smseg::SegmentOptions from_file = seg_opts;
        apply_segment_config(config_path, &from_file);
        if (o_flow->count() == 0) seg_opts.flow_dir = from_file.flow_dir;
        if (o_calib->count() == 0) seg_opts.calibration_path = from_file.calibration_path;
        if (o_mount->count() == 0) seg_opts.mounting_path = from_file.mounting_path;
        if (o_odo->count() == 0) seg_opts.odometry_path = from_file.odometry_path;
        if (o_out->count() == 0) seg_opts.output_dir = from_file.output_dir;
        if (o_cell->count() == 0) seg_opts.params.cell_size = from_file.params.cell_size;
        if (o_thresh->count() == 0) seg_opts.params.threshold = from_file.params.threshold;
        if (o_floor->count() == 0) seg_opts.params.motion_floor = from_file.params.motion_floor;
        if (o_fps->count() == 0) seg_opts.params.frame_rate = from_file.params.frame_rate;
        if (o_jobs->count() == 0) seg_opts.params.jobs = from_file.params.jobs;
        if (o_weights->count() == 0) seg_opts.params.weights = from_file.params.weights;
        if (o_lh->count() == 0)
          seg_opts.params.thresholds.lambda_height = from_file.params.thresholds.lambda_height;
        if (o_lp->count() == 0)
          seg_opts.params.thresholds.lambda_antiparallel =
              from_file.params.thresholds.lambda_antiparallel;
        if (o_ls->count() == 0)
          seg_opts.params.thresholds.lambda_static = from_file.params.thresholds.lambda_static;
      }
      if (o_weights->count() > 0) {
        seg_opts.params.weights = {weights[0], weights[1], weights[2], weights[3], weights[4]};
      }
      const auto require = [](const std::string& value, const char* what) {
        if (value.empty()) throw std::runtime_error(std::string(what) + " is required");
      };
      require(seg_opts.flow_dir, "--flow-dir");
      require(seg_opts.calibration_path, "--calibration");
      require(seg_opts.mounting_path, "--mounting");
      require(seg_opts.odometry_path, "--odometry");
      require(seg_opts.output_dir, "--out");
      seg_opts.execution = serial ? smseg::Execution::serial : smseg::Execution::parallel;
      seg_opts.write_heatmaps = !no_heat;
      seg_opts.write_likelihoods = !no_likelihood;

      const smseg::SegmentReport report = smseg::run_segmentation(seg_opts);
      std::cout << "segmented " << report.pairs_ok << "/" << report.pairs.size()
                << " pairs -> " << seg_opts.output_dir << " (config " << report.config_hash
                << ")\n";
      return 0;
    }

    if (ev->parsed()) {
      const smseg::EvalSummary summary = smseg::run_evaluation(ev_opts);
      std::cout << "scored " << summary.frames.size() << " frames, fp_ratio "
                << smseg::format_double(summary.fp_ratio) << '\n';
      for (const auto& c : summary.classes) {
        std::cout << "  " << c.klass << ": detection " << c.detected << "/" << c.in_range
                  << " in range, mean tpr " << smseg::format_double(c.mean_tpr) << ", mean iou "
                  << smseg::format_double(c.mean_iou) << '\n';
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
