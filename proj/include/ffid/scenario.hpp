#pragma once

/**
 * @file scenario.hpp
 * @brief Scenario configuration and the end-to-end experiment drivers behind
 *        the command-line tool.
 */

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ffid/control.hpp"
#include "ffid/estimation.hpp"
#include "ffid/io.hpp"
#include "ffid/trajectory.hpp"

namespace ffid {

/// A rigid payload attached to the robot.
struct LoadSpec {
  std::string name = "load";
  double mass = 0.0;
  Vec3 position = Vec3::Zero();   ///< its centre in the body frame, m
  Mat3 inertia = Mat3::Zero();    ///< about its own centre, kg·m²
};

struct ScenarioConfig {
  InertialParams robot;          ///< pre-grasp robot (centre of mass at the origin)
  InertialParams truth;          ///< robot with the grasped load
  InertialParams nominal;        ///< parameters given to the controller
  bool nominal_is_truth = false; ///< controller uses the post-grasp truth
  ActuationMatrix A = ActuationMatrix::illustrative();
  ExcitationConfig excitation;
  double sigma_u = 0.05;         ///< command noise level behind the criterion weighting Σ
  std::optional<fs::path> trajectory_file;
  ControllerConfig controller;
  SimulationConfig simulation;
  NoiseModel noise;
  EstimationConfig estimation;
  std::uint64_t seed = 1;
  fs::path output_dir = "ffid-out";
  std::vector<double> saturation_levels = {std::numeric_limits<double>::infinity(), 1.2, 1.1, 1.05, 1.0};
  int trajectories_per_criterion = 5;
  std::vector<LoadSpec> criteria_loads;
  Execution execution = Execution::parallel;

  /// 6.047 kg robot carrying a 1.2 kg load, controller on the pre-grasp model.
  static ScenarioConfig defaults();

  /// Cross-field checks. Throws config.
  void validate() const;
};

LoadSpec default_load();
LoadSpec second_load();
InertialParams default_robot();

/// Parses a JSON config (see README for the schema). Unknown keys and wrong
/// types are config errors; relative paths resolve against base_dir.
ScenarioConfig parse_config(const Json& j, const fs::path& base_dir = ".");
ScenarioConfig load_config(const fs::path& path);
/// Fully expanded configuration, accepted back by parse_config.
Json config_to_json(const ScenarioConfig& cfg);

/// Error whose message is prefixed with the pipeline stage that raised it.
Error stage_error(const std::string& stage, const Error& e);

/// Optimizes (or loads, when a trajectory file is configured) the reference.
FourierTrajectory scenario_trajectory(const ScenarioConfig& cfg);
MeasurementLog scenario_log(const ScenarioConfig& cfg, const FourierTrajectory& traj);
EstimationResult scenario_estimate(const ScenarioConfig& cfg, const MeasurementLog& log);

struct FullRun {
  FourierTrajectory trajectory;
  MeasurementLog log;
  EstimationResult result;
};

/// trajectory → closed-loop log → estimate; stage-tagged errors.
FullRun run_full(const ScenarioConfig& cfg);

/// Writes trajectory.json, log.csv (+ log.meta.json), result.json,
/// sweep.csv, energy.csv and tracking.csv into dir.
void write_full_run(const fs::path& dir, const FullRun& run);

struct SaturationRow {
  double bound = 0.0;  ///< symmetric |u| limit (+∞ for unbounded)
  double saturation_fraction = 0.0;
  int n_star = 0;
  ParameterErrors at_n_star;
  int best_n = 0;
  ParameterErrors at_best_n;
  std::string failure;  ///< estimation error at this level; errors are NaN then
};

/// One run per bound level on a shared reference trajectory. Needs at least
/// three levels. Rows come back in level order. A level whose estimation
/// fails is reported in its row rather than aborting the study.
std::vector<SaturationRow> run_saturation_study(const ScenarioConfig& cfg, const std::vector<double>& levels);

/// Trajectories optimized for each criterion, tracked with every configured
/// load and estimated.
std::vector<CriteriaRow> run_compare_criteria(const ScenarioConfig& cfg);

CsvTable saturation_table(const std::vector<SaturationRow>& rows);
/// criterion, trajectory, load, n_star and the parameter errors; the
/// criterion and load columns are text.
std::string criteria_csv(const std::vector<CriteriaRow>& rows);
std::vector<CriteriaRow> parse_criteria_csv(const std::string& text);

}  // namespace ffid
