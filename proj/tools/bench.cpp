// Benchmark of the per-cell constraint kernel: serial reference vs the
// OpenMP path, verifying bit-identical output while timing both.

#include <chrono>
#include <cstring>
#include <iostream>

#include "CLI11.hpp"
#include "smseg/pipeline.hpp"
#include "smseg/simulator.hpp"

namespace {

double run_timed(const smseg::FlowGrid& grid, const smseg::FisheyeCalibration& calib,
                 const smseg::FramePairGeometry& geometry, const smseg::PipelineParams& params,
                 smseg::Execution execution, int repeats, smseg::PairEvaluation* last) {
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < repeats; ++i) {
    *last = smseg::evaluate_pair(grid, calib, geometry, params, execution);
  }
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(stop - start).count() / repeats;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constraint kernel benchmark: serial reference vs parallel"};
  int repeats = 20;
  int jobs = 0;
  app.add_option("--repeats", repeats, "Timed repetitions per path")->check(CLI::PositiveNumber);
  app.add_option("--jobs", jobs, "Worker threads for the parallel path (0 = default)");
  CLI11_PARSE(app, argc, argv);

  try {
    smseg::SceneSpec spec = smseg::preset_scene("crossing");
    const smseg::SimulatedDataset data = smseg::simulate(spec);

    const smseg::FlowGrid grid = smseg::average_flow(data.flows.front(), spec.cell_size);
    const smseg::PlanarPose delta =
        smseg::dead_reckon(data.odometry, 0.0, 1.0 / spec.frame_rate);
    smseg::PipelineParams params;
    params.cell_size = spec.cell_size;
    params.frame_rate = spec.frame_rate;
    params.jobs = jobs;
    const smseg::FramePairGeometry geometry =
        smseg::camera_motion(delta, spec.mounting, params.motion_floor);

    smseg::PairEvaluation serial, parallel;
    // Warm-up also provides the outputs compared below.
    smseg::evaluate_pair(grid, spec.calibration, geometry, params, smseg::Execution::serial);
    const double t_serial = run_timed(grid, spec.calibration, geometry, params,
                                      smseg::Execution::serial, repeats, &serial);
    const double t_parallel = run_timed(grid, spec.calibration, geometry, params,
                                        smseg::Execution::parallel, repeats, &parallel);

    const auto& a = serial.likelihood;
    const auto& b = parallel.likelihood;
    const bool identical =
        a.value.size() == b.value.size() &&
        std::memcmp(a.value.data(), b.value.data(), a.value.size() * sizeof(double)) == 0 &&
        a.applicable == b.applicable;

    const std::size_t cells = a.value.size();
    std::cout << "cells " << cells << ", repeats " << repeats << '\n';
    std::cout << "serial   " << t_serial * 1e3 << " ms/pair ("
              << static_cast<double>(cells) / t_serial / 1e6 << " Mcells/s)\n";
    std::cout << "parallel " << t_parallel * 1e3 << " ms/pair ("
              << static_cast<double>(cells) / t_parallel / 1e6 << " Mcells/s)\n";
    std::cout << "speedup  " << t_serial / t_parallel << "x\n";
    std::cout << "outputs  " << (identical ? "bit-identical" : "MISMATCH") << '\n';
    return identical ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
