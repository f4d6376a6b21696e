// Serial vs OpenMP timings of the parallel kernels.

#include <benchmark/benchmark.h>

#include <vector>

#include "ffid/control.hpp"
#include "ffid/estimation.hpp"
#include "ffid/scenario.hpp"
#include "ffid/trajectory.hpp"

namespace {

using namespace ffid;

Execution mode(const benchmark::State& state) { return state.range(0) ? Execution::parallel : Execution::serial; }

ExcitationConfig small_excitation() {
  ExcitationConfig cfg;
  cfg.multistart = 8;
  cfg.local_iterations = 20;
  return cfg;
}

const FourierTrajectory& reference() {
  static const FourierTrajectory traj = random_feasible_trajectory(small_excitation(), 3);
  return traj;
}

const InertialParams& truth() {
  static const InertialParams p = attach_load(default_robot(), 1.2, Vec3(0.15, -0.10, 0.12));
  return p;
}

void BM_StackRegressor(benchmark::State& state) {
  const int N = 10000;
  std::vector<KinematicSample> kin;
  std::vector<Wrench> w(N);
  for (int j = 0; j < N; ++j) {
    const TrajectorySample s = eval(reference(), j * 0.001);
    kin.push_back(kinematic_sample(s.X, s.Xdot, s.Xddot));
  }
  for (auto _ : state) benchmark::DoNotOptimize(stack_regressor(kin, w, mode(state)));
}
BENCHMARK(BM_StackRegressor)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_OptimizeTrajectory(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(optimize_trajectory(small_excitation(), 1, mode(state)));
}
BENCHMARK(BM_OptimizeTrajectory)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SelectHarmonics(benchmark::State& state) {
  MeasurementLog log = ideal_tracking_log(truth(), ActuationMatrix::illustrative(), reference(), 10, 100.0);
  log = add_measurement_noise(log, NoiseModel{}, 1);
  const PhaseData data = phase_data(log, ActuationMatrix::illustrative());
  for (auto _ : state) benchmark::DoNotOptimize(select_harmonics(data, 3, 20, mode(state)));
}
BENCHMARK(BM_SelectHarmonics)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SaturationStudy(benchmark::State& state) {
  ScenarioConfig cfg = ScenarioConfig::defaults();
  cfg.execution = mode(state);
  cfg.excitation = small_excitation();
  cfg.controller.type = ControllerType::computed_wrench;
  cfg.simulation.cycles = 1;
  const std::vector<double> levels = {std::numeric_limits<double>::infinity(), 1.2, 1.0, 0.8};
  for (auto _ : state) benchmark::DoNotOptimize(run_saturation_study(cfg, levels));
}
BENCHMARK(BM_SaturationStudy)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
