// Command-line front end: trajectory generation, closed-loop simulation,
// estimation and the batch studies.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "ffid/io.hpp"
#include "ffid/scenario.hpp"

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config, "Scenario config (JSON); defaults to the built-in scenario");
  cmd->add_option("--seed", opts.seed, "Master seed (overrides the config)");
  cmd->add_option("--out", opts.out, "Output directory (overrides the config)");
}

ffid::ScenarioConfig resolve(const CommonOptions& opts) {
  ffid::ScenarioConfig cfg =
      opts.config.empty() ? ffid::ScenarioConfig::defaults() : ffid::load_config(opts.config);
  if (opts.seed) cfg.seed = *opts.seed;
  if (!opts.out.empty()) cfg.output_dir = opts.out;
  return cfg;
}

void print_result(const ffid::EstimationResult& r) {
  const auto p = ffid::InertialParams::from_vector(r.pi_hat);
  std::cout << "n* = " << r.n_star << ", mean |P - dT/dt| = " << r.residual_energy << " W\n"
            << "mass = " << p.mass << " kg, com offset = [" << p.p_off().transpose() << "] m\n"
            << "inertia (xx xy xz yy yz zz) = [" << p.inertia_c.transpose() << "] kg m^2\n";
  if (r.errors) {
    std::cout << "errors: mass " << r.errors->mass << " kg, inertia rmse " << r.errors->inertia_rmse
              << " kg m^2, offset " << r.errors->offset << " m\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inertial parameter identification of a free-flying robot"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::string log_path;

  auto* gen = app.add_subcommand("gen-traj", "Optimize an excitation trajectory");
  add_common(gen, opts);

  auto* sim = app.add_subcommand("simulate", "Track the reference in closed loop and write the log");
  add_common(sim, opts);

  auto* est = app.add_subcommand("estimate", "Estimate inertial parameters from a log");
  add_common(est, opts);
  est->add_option("--log", log_path, "Measurement log CSV")->required();

  auto* sweep = app.add_subcommand("sweep-harmonics", "Per-order residual and error table for a log");
  add_common(sweep, opts);
  sweep->add_option("--log", log_path, "Measurement log CSV")->required();

  auto* full = app.add_subcommand("full-run", "Trajectory, simulation and estimation in one go");
  add_common(full, opts);

  auto* sat = app.add_subcommand("saturation-study", "Repeat the run over a schedule of actuator bounds");
  add_common(sat, opts);

  auto* crit = app.add_subcommand("compare-criteria", "Compare trajectories optimized for each criterion");
  add_common(crit, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    const ffid::ScenarioConfig cfg = resolve(opts);
    const ffid::fs::path out = cfg.output_dir;

    if (gen->parsed()) {
      const auto traj = ffid::scenario_trajectory(cfg);
      ffid::save_trajectory(out / "trajectory.json", traj);
      std::cout << "wrote " << (out / "trajectory.json").string() << "\n";
    } else if (sim->parsed()) {
      const auto traj = ffid::scenario_trajectory(cfg);
      const auto log = ffid::scenario_log(cfg, traj);
      ffid::save_trajectory(out / "trajectory.json", traj);
      ffid::save_log(out / "log.csv", log);
      ffid::save_table(out / "tracking.csv", ffid::tracking_table(log, traj));
      std::cout << "wrote " << (out / "log.csv").string() << " (saturation fraction "
                << log.meta.saturation_fraction << ")\n";
    } else if (est->parsed() || sweep->parsed()) {
      const auto log = ffid::load_log(log_path);
      const auto result = ffid::scenario_estimate(cfg, log);
      ffid::save_table(out / "sweep.csv", ffid::sweep_table(result.selection));
      if (est->parsed()) {
        ffid::save_result(out / "result.json", result);
        ffid::save_table(out / "energy.csv", ffid::energy_table(result.selection.selected().energy));
      }
      print_result(result);
    } else if (full->parsed()) {
      const auto run = ffid::run_full(cfg);
      ffid::write_full_run(out, run);
      print_result(run.result);
      std::cout << "saturation fraction " << run.log.meta.saturation_fraction << "; outputs in " << out.string()
                << "\n";
    } else if (sat->parsed()) {
      const auto rows = ffid::run_saturation_study(cfg, cfg.saturation_levels);
      ffid::save_table(out / "saturation.csv", ffid::saturation_table(rows));
      for (const auto& r : rows) {
        std::cout << "bound " << r.bound << ": saturation " << r.saturation_fraction;
        if (r.failure.empty()) {
          std::cout << ", n* " << r.n_star << ", mass error " << r.at_n_star.mass << " kg\n";
        } else {
          std::cout << ", estimation failed (" << r.failure.substr(0, r.failure.find('\n')) << ")\n";
        }
      }
    } else if (crit->parsed()) {
      const auto rows = ffid::run_compare_criteria(cfg);
      ffid::write_text_file(out / "criteria.csv", ffid::criteria_csv(rows));
      std::cout << "wrote " << rows.size() << " rows to " << (out / "criteria.csv").string() << "\n";
    }
  } catch (const ffid::Error& e) {
    std::cerr << "ffid: " << ffid::to_string(e.kind()) << ": " << e.what() << "\n";
    return ffid::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "ffid: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
