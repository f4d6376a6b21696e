#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "ffid/scenario.hpp"
#include "test_support.hpp"

namespace ffid {
namespace {

// A scenario small enough to run end to end in a unit test.
Json fast_config() {
  return Json::parse(R"({
    "seed": 3,
    "excitation": {"multistart": 2, "local_iterations": 10, "samples": 60},
    "controller": {"type": "pd", "period": 0.01},
    "simulation": {"cycles": 1, "sample_rate": 50},
    "estimation": {"n_min": 3, "n_max": 8}
  })");
}

std::optional<ErrorKind> kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

TEST(Config, DefaultsDescribeTheLoadedRobot) {
  const ScenarioConfig cfg = ScenarioConfig::defaults();
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_DOUBLE_EQ(cfg.robot.mass, 6.047);
  EXPECT_DOUBLE_EQ(cfg.truth.mass, 6.047 + 1.2);
  EXPECT_EQ(cfg.nominal.to_vector(), cfg.robot.to_vector());
  EXPECT_FALSE(cfg.nominal_is_truth);
  EXPECT_EQ(cfg.simulation.cycles, 10);
  EXPECT_EQ(cfg.estimation.n_min, 3);
  EXPECT_EQ(cfg.estimation.n_max, 20);
  EXPECT_EQ(cfg.criteria_loads.size(), 2u);
}

TEST(Config, ParsesOverrides) {
  const ScenarioConfig cfg = parse_config(Json::parse(R"({
    "robot": {"mass": 5.0, "inertia": [0.1, 0.1, 0.1]},
    "load": {"mass": 1.0, "position": [0.1, 0.0, 0.0]},
    "nominal": "true",
    "actuator_bounds": 3.0,
    "noise": {"position_sigma": 0.0, "angle_sigma_deg": 0.0},
    "saturation_study": {"levels": [null, 2.0, 1.0]}
  })"));
  EXPECT_DOUBLE_EQ(cfg.truth.mass, 6.0);
  EXPECT_NEAR(cfg.truth.p_off()(0), 0.1 / 6.0, 1e-15);
  EXPECT_TRUE(cfg.nominal_is_truth);
  EXPECT_EQ(cfg.nominal.to_vector(), cfg.truth.to_vector());
  EXPECT_EQ(cfg.controller.bounds.upper(2), 3.0);
  EXPECT_EQ(cfg.noise.angle_sigma, 0.0);
  ASSERT_EQ(cfg.saturation_levels.size(), 3u);
  EXPECT_TRUE(std::isinf(cfg.saturation_levels[0]));
}

TEST(Config, UnknownKeysAndWrongTypesAreConfigErrors) {
  EXPECT_EQ(kind_of([] { parse_config(Json::parse(R"({"sead": 1})")); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { parse_config(Json::parse(R"({"simulation": {"cycles": "ten"}})")); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { parse_config(Json::parse(R"({"controller": {"type": "lqr"}})")); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { parse_config(Json::parse(R"({"excitation": {"criterion": "J3"}})")); }), ErrorKind::config);
  EXPECT_EQ(kind_of([] { parse_config(Json::parse(R"({"robot": {"mass": -1, "inertia": [1, 1, 1]}})")); }),
            ErrorKind::config);
  EXPECT_EQ(kind_of([] { parse_config(Json::parse(R"({"simulation": {"sample_rate": 300}})")); }),
            ErrorKind::config);
  EXPECT_EQ(kind_of([] { load_config("/nonexistent/ffid.json"); }), ErrorKind::config);
}

TEST(Config, ExpandedJsonParsesBackToTheSameConfig) {
  const ScenarioConfig a = parse_config(fast_config());
  const Json ja = config_to_json(a);
  const ScenarioConfig b = parse_config(ja);
  EXPECT_EQ(config_to_json(b).dump(), ja.dump());
  EXPECT_EQ(b.truth.to_vector(), a.truth.to_vector());
  EXPECT_EQ(b.controller.blocks, a.controller.blocks);

  ScenarioConfig c = ScenarioConfig::defaults();
  c.controller.bounds = ActuatorBounds::unbounded();
  EXPECT_EQ(config_to_json(parse_config(config_to_json(c))).dump(), config_to_json(c).dump());
}

TEST(Scenario, MissingTrajectoryFileNamesTheStage) {
  Json j = fast_config();
  j["trajectory_file"] = "/nonexistent/reference.json";
  const ScenarioConfig cfg = parse_config(j);
  try {
    run_full(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
    EXPECT_NE(std::string(e.what()).find("stage"), std::string::npos);
  }
}

TEST(Scenario, FullRunIsDeterministicAndWritesOutputs) {
  const ScenarioConfig cfg = parse_config(fast_config());
  const FullRun a = run_full(cfg);
  const FullRun b = run_full(cfg);
  EXPECT_EQ(a.trajectory, b.trajectory);
  EXPECT_EQ(a.log.pose, b.log.pose);
  EXPECT_EQ(a.result.pi_hat, b.result.pi_hat);
  EXPECT_GE(a.result.n_star, 3);
  EXPECT_LE(a.result.n_star, 8);
  ASSERT_TRUE(a.result.errors.has_value());

  const fs::path dir = fs::temp_directory_path() / "ffid-scenario-full";
  fs::remove_all(dir);
  write_full_run(dir, a);
  for (const char* f : {"trajectory.json", "log.csv", "log.meta.json", "result.json", "sweep.csv", "energy.csv",
                        "tracking.csv"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  EXPECT_EQ(load_log(dir / "log.csv").pose, a.log.pose);
  EXPECT_EQ(load_result(dir / "result.json").n_star, a.result.n_star);
  fs::remove_all(dir);
}

TEST(Scenario, SaturationStudyTightensMonotonically) {
  const ScenarioConfig cfg = parse_config(fast_config());
  EXPECT_THROW(run_saturation_study(cfg, {1.0, 2.0}), Error);
  const auto rows = run_saturation_study(cfg, {std::numeric_limits<double>::infinity(), 1.0, 0.5});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].saturation_fraction, 0.0);
  EXPECT_LE(rows[0].saturation_fraction, rows[1].saturation_fraction);
  EXPECT_LE(rows[1].saturation_fraction, rows[2].saturation_fraction);
  EXPECT_GT(rows[2].saturation_fraction, 0.0);
  const CsvTable t = saturation_table(rows);
  EXPECT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.header.back(), "estimated");
}

TEST(Scenario, CriteriaCsvRoundTrip) {
  std::vector<CriteriaRow> rows(2);
  rows[0] = {Criterion::J1, 0, "load1", 4, {}};
  rows[0].errors.mass = 0.25;
  rows[1] = {Criterion::J2, 3, "load2", 7, {}};
  rows[1].errors.offset_relative = 1.0 / 3.0;
  const auto back = parse_criteria_csv(criteria_csv(rows));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].criterion, Criterion::J2);
  EXPECT_EQ(back[1].load, "load2");
  EXPECT_EQ(back[1].n_star, 7);
  EXPECT_EQ(back[0].errors.mass, 0.25);
  EXPECT_EQ(back[1].errors.offset_relative, 1.0 / 3.0);
  EXPECT_TRUE(parse_criteria_csv(criteria_csv({})).empty());
}

}  // namespace
}  // namespace ffid
