#include "ffid/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "ffid/random.hpp"

namespace ffid {

InertialParams default_robot() {
  return InertialParams::from_com(6.047, Vec3::Zero(), Vec3(0.0453, 0.0417, 0.0519).asDiagonal());
}

LoadSpec default_load() { return {"load1", 1.2, Vec3(0.15, -0.10, 0.12), Mat3::Zero()}; }

LoadSpec second_load() { return {"load2", 0.5, Vec3(-0.10, 0.12, 0.08), Mat3::Zero()}; }

ScenarioConfig ScenarioConfig::defaults() {
  ScenarioConfig cfg;
  cfg.robot = default_robot();
  const LoadSpec load = default_load();
  cfg.truth = attach_load(cfg.robot, load.mass, load.position, load.inertia);
  cfg.nominal = cfg.robot;
  cfg.controller.nominal = cfg.nominal;
  cfg.controller.bounds = ActuatorBounds::symmetric(2.5);
  cfg.excitation.sigma = wrench_covariance(cfg.A, cfg.sigma_u);
  cfg.criteria_loads = {default_load(), second_load()};
  return cfg;
}

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::config, msg); };
  try {
    robot.validate();
    truth.validate();
    nominal.validate();
  } catch (const Error& e) {
    fail(std::string("parameters: ") + e.what());
  }
  excitation.validate();
  controller.validate();
  simulation.validate(excitation.period, controller.period);
  estimation.validate();
  if (!(sigma_u > 0.0)) fail("excitation.sigma_u must be positive");
  if (!(noise.position_sigma >= 0.0) || !(noise.angle_sigma >= 0.0)) fail("noise levels must be non-negative");
  for (double level : saturation_levels) {
    if (!(level > 0.0)) fail("saturation_study.levels must be positive (null for unbounded)");
  }
  if (trajectories_per_criterion < 1) fail("compare_criteria.trajectories_per_criterion must be at least 1");
  for (const auto& l : criteria_loads) {
    if (!(l.mass > 0.0)) fail("compare_criteria load '" + l.name + "' needs a positive mass");
  }
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

[[noreturn]] void config_fail(const std::string& path, const std::string& msg) {
  throw Error(ErrorKind::config, path + ": " + msg);
}

void check_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& path) {
  if (!obj.is_object()) config_fail(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      config_fail(path, "unknown key '" + key + "'");
    }
  }
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double as_number(const Json& j, const std::string& path) {
  if (!j.is_number()) config_fail(path, "expected a number, got " + j.dump());
  return j.get<double>();
}

int as_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) config_fail(path, "expected an integer, got " + j.dump());
  return j.get<int>();
}

void read(const Json& obj, const char* key, const std::string& path, double& out) {
  if (obj.contains(key)) out = as_number(obj.at(key), join(path, key));
}

void read(const Json& obj, const char* key, const std::string& path, int& out) {
  if (obj.contains(key)) out = as_int(obj.at(key), join(path, key));
}

Eigen::VectorXd as_vector(const Json& j, const std::string& path, std::initializer_list<int> sizes) {
  if (!j.is_array() || std::find(sizes.begin(), sizes.end(), static_cast<int>(j.size())) == sizes.end()) {
    std::ostringstream os;
    os << "expected an array of ";
    for (auto it = sizes.begin(); it != sizes.end(); ++it) os << (it == sizes.begin() ? "" : " or ") << *it;
    os << " numbers";
    config_fail(path, os.str());
  }
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = as_number(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

Vec3 as_vec3(const Json& j, const std::string& path) { return as_vector(j, path, {3}); }

/// Diagonal (3) or full symmetric (6 components) inertia.
Mat3 as_inertia(const Json& j, const std::string& path) {
  const Eigen::VectorXd v = as_vector(j, path, {3, 6});
  if (v.size() == 3) return v.asDiagonal();
  return symmetric_from_components(v);
}

Json json_vector(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

/// {"pi": [10]} or {"mass", "com_offset", "inertia"} with inertia about the
/// centre of mass.
InertialParams parse_params(const Json& j, const std::string& path) {
  check_keys(j, {"pi", "mass", "com_offset", "inertia"}, path);
  if (j.contains("pi")) {
    if (j.size() != 1) config_fail(path, "'pi' cannot be combined with other keys");
    return InertialParams::from_vector(as_vector(j.at("pi"), join(path, "pi"), {10}));
  }
  if (!j.contains("mass") || !j.contains("inertia")) config_fail(path, "needs 'mass' and 'inertia' (or 'pi')");
  const double m = as_number(j.at("mass"), join(path, "mass"));
  const Vec3 p = j.contains("com_offset") ? as_vec3(j.at("com_offset"), join(path, "com_offset")) : Vec3::Zero();
  const Mat3 J = as_inertia(j.at("inertia"), join(path, "inertia"));
  if (!(m > 0.0)) config_fail(join(path, "mass"), "must be positive");
  return InertialParams::from_com(m, p, J);
}

LoadSpec parse_load(const Json& j, const std::string& path) {
  check_keys(j, {"name", "mass", "position", "inertia"}, path);
  LoadSpec l;
  if (j.contains("name")) {
    if (!j.at("name").is_string()) config_fail(join(path, "name"), "expected a string");
    l.name = j.at("name").get<std::string>();
  }
  if (!j.contains("mass")) config_fail(path, "needs 'mass'");
  l.mass = as_number(j.at("mass"), join(path, "mass"));
  if (j.contains("position")) l.position = as_vec3(j.at("position"), join(path, "position"));
  if (j.contains("inertia")) l.inertia = as_inertia(j.at("inertia"), join(path, "inertia"));
  return l;
}

Json load_json(const LoadSpec& l) {
  return {{"name", l.name},
          {"mass", l.mass},
          {"position", json_vector(l.position)},
          {"inertia", json_vector(components_from_symmetric(l.inertia))}};
}

Vec6 bound_vector(const Json& j, const std::string& path, double sign) {
  if (j.is_null()) return Vec6::Constant(sign * std::numeric_limits<double>::infinity());
  if (j.is_number()) return Vec6::Constant(j.get<double>());
  if (!j.is_array() || j.size() != 6) config_fail(path, "expected a number, null or an array of 6");
  Vec6 v;
  for (int i = 0; i < 6; ++i) {
    v(i) = j[i].is_null() ? sign * std::numeric_limits<double>::infinity()
                          : as_number(j[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

ActuatorBounds parse_bounds(const Json& j, const std::string& path) {
  if (j.is_null()) return ActuatorBounds::unbounded();
  if (j.is_number()) {
    const double v = j.get<double>();
    if (!(v > 0.0)) config_fail(path, "symmetric bound must be positive");
    return ActuatorBounds::symmetric(v);
  }
  check_keys(j, {"lower", "upper"}, path);
  ActuatorBounds b;
  if (!j.contains("lower") || !j.contains("upper")) config_fail(path, "needs 'lower' and 'upper'");
  b.lower = bound_vector(j.at("lower"), join(path, "lower"), -1.0);
  b.upper = bound_vector(j.at("upper"), join(path, "upper"), 1.0);
  return b;
}

Json bound_json(const Vec6& v) {
  Json a = Json::array();
  for (int i = 0; i < 6; ++i) a.push_back(std::isfinite(v(i)) ? Json(v(i)) : Json(nullptr));
  return a;
}

void parse_motion_bounds(const Json& j, const std::string& path, MotionBounds& b) {
  check_keys(j, {"position", "angle", "velocity", "rate", "acceleration", "angular_acceleration"}, path);
  auto apply = [&](const char* key, Vec6& lo, Vec6& hi, int first) {
    if (!j.contains(key)) return;
    const double v = as_number(j.at(key), join(path, key));
    if (!(v > 0.0)) config_fail(join(path, key), "must be positive");
    lo.segment<3>(first).setConstant(-v);
    hi.segment<3>(first).setConstant(v);
  };
  apply("position", b.x_min, b.x_max, 0);
  apply("angle", b.x_min, b.x_max, 3);
  apply("velocity", b.v_min, b.v_max, 0);
  apply("rate", b.v_min, b.v_max, 3);
  apply("acceleration", b.a_min, b.a_max, 0);
  apply("angular_acceleration", b.a_min, b.a_max, 3);
}

void parse_excitation(const Json& j, const std::string& path, ScenarioConfig& cfg) {
  check_keys(j, {"period", "harmonics", "criterion", "samples", "multistart", "local_iterations", "sigma_u", "bounds"},
             path);
  ExcitationConfig& e = cfg.excitation;
  read(j, "period", path, e.period);
  read(j, "harmonics", path, e.harmonics);
  read(j, "samples", path, e.samples);
  read(j, "multistart", path, e.multistart);
  read(j, "local_iterations", path, e.local_iterations);
  read(j, "sigma_u", path, cfg.sigma_u);
  if (j.contains("criterion")) {
    if (!j.at("criterion").is_string()) config_fail(join(path, "criterion"), "expected \"J1\" or \"J2\"");
    try {
      e.criterion = criterion_from_string(j.at("criterion").get<std::string>());
    } catch (const Error& err) {
      config_fail(join(path, "criterion"), err.what());
    }
  }
  if (j.contains("bounds")) parse_motion_bounds(j.at("bounds"), join(path, "bounds"), e.bounds);
}

void parse_controller(const Json& j, const std::string& path, ControllerConfig& c) {
  check_keys(j, {"type", "period", "horizon", "iterations", "blocks", "weights", "gains"}, path);
  if (j.contains("type")) {
    if (!j.at("type").is_string()) config_fail(join(path, "type"), "expected \"mpc\" or \"pd\"");
    c.type = controller_type_from_string(j.at("type").get<std::string>());
  }
  read(j, "period", path, c.period);
  read(j, "horizon", path, c.horizon);
  read(j, "iterations", path, c.iterations);
  if (j.contains("blocks")) {
    const Json& b = j.at("blocks");
    if (!b.is_array() || b.empty()) config_fail(join(path, "blocks"), "expected a non-empty array of integers");
    c.blocks.clear();
    for (std::size_t i = 0; i < b.size(); ++i) c.blocks.push_back(as_int(b[i], join(path, "blocks")));
  } else if (j.contains("horizon") || j.contains("period")) {
    // A single block per step keeps a custom horizon consistent.
    c.blocks.assign(c.horizon_steps(), 1);
  }
  if (j.contains("weights")) {
    const Json& w = j.at("weights");
    const std::string wp = join(path, "weights");
    check_keys(w, {"position", "velocity", "attitude", "rate", "terminal_scale", "effort", "Q", "Q_N", "P"}, wp);
    double pos = c.Q(0), vel = c.Q(3), att = c.Q(6), rate = c.Q(9), terminal = 10.0, effort = c.P(0);
    read(w, "position", wp, pos);
    read(w, "velocity", wp, vel);
    read(w, "attitude", wp, att);
    read(w, "rate", wp, rate);
    read(w, "terminal_scale", wp, terminal);
    read(w, "effort", wp, effort);
    c.Q = make_error_weights(pos, vel, att, rate);
    c.Q_N = terminal * c.Q;
    c.P = Vec6::Constant(effort);
    if (w.contains("Q")) c.Q = as_vector(w.at("Q"), join(wp, "Q"), {12});
    if (w.contains("Q_N")) c.Q_N = as_vector(w.at("Q_N"), join(wp, "Q_N"), {12});
    if (w.contains("P")) c.P = as_vector(w.at("P"), join(wp, "P"), {6});
  }
  if (j.contains("gains")) {
    const Json& g = j.at("gains");
    const std::string gp = join(path, "gains");
    check_keys(g, {"kp", "kd", "kr", "kw"}, gp);
    read(g, "kp", gp, c.kp);
    read(g, "kd", gp, c.kd);
    read(g, "kr", gp, c.kr);
    read(g, "kw", gp, c.kw);
  }
}

std::uint64_t as_seed(const Json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  config_fail(path, "expected a non-negative integer");
}

}  // namespace

ScenarioConfig parse_config(const Json& j, const fs::path& base_dir) {
  ScenarioConfig cfg = ScenarioConfig::defaults();
  check_keys(j,
             {"seed", "output_dir", "parallel", "robot", "load", "true_params", "nominal", "actuation_matrix",
              "actuator_bounds", "excitation", "trajectory_file", "controller", "simulation", "noise", "estimation",
              "saturation_study", "compare_criteria"},
             "config");
  try {
    if (j.contains("seed")) cfg.seed = as_seed(j.at("seed"), "seed");
    if (j.contains("output_dir")) {
      if (!j.at("output_dir").is_string()) config_fail("output_dir", "expected a string");
      cfg.output_dir = (base_dir / j.at("output_dir").get<std::string>()).lexically_normal();
    }
    if (j.contains("parallel")) {
      if (!j.at("parallel").is_boolean()) config_fail("parallel", "expected true or false");
      cfg.execution = j.at("parallel").get<bool>() ? Execution::parallel : Execution::serial;
    }
    if (j.contains("robot")) cfg.robot = parse_params(j.at("robot"), "robot");
    if (j.contains("load")) {
      if (j.at("load").is_null()) {
        cfg.truth = cfg.robot;
      } else {
        const LoadSpec l = parse_load(j.at("load"), "load");
        cfg.truth = attach_load(cfg.robot, l.mass, l.position, l.inertia);
      }
    } else if (j.contains("robot")) {
      const LoadSpec l = default_load();
      cfg.truth = attach_load(cfg.robot, l.mass, l.position, l.inertia);
    }
    if (j.contains("true_params")) cfg.truth = parse_params(j.at("true_params"), "true_params");

    cfg.nominal = cfg.robot;
    if (j.contains("nominal")) {
      const Json& n = j.at("nominal");
      if (n.is_string()) {
        const auto s = n.get<std::string>();
        if (s == "true") {
          cfg.nominal = cfg.truth;
          cfg.nominal_is_truth = true;
        } else if (s != "stale") {
          config_fail("nominal", "expected \"stale\", \"true\" or a parameter object");
        }
      } else {
        cfg.nominal = parse_params(n, "nominal");
      }
    }

    if (j.contains("actuation_matrix")) {
      const Json& a = j.at("actuation_matrix");
      if (!a.is_array() || a.size() != 6) config_fail("actuation_matrix", "expected 6 rows of 6 numbers");
      Mat6 A;
      for (int r = 0; r < 6; ++r) {
        A.row(r) = as_vector(a[r], "actuation_matrix[" + std::to_string(r) + "]", {6}).transpose();
      }
      try {
        cfg.A = ActuationMatrix(A);
      } catch (const Error& e) {
        config_fail("actuation_matrix", e.what());
      }
    }
    if (j.contains("actuator_bounds")) cfg.controller.bounds = parse_bounds(j.at("actuator_bounds"), "actuator_bounds");
    if (j.contains("excitation")) parse_excitation(j.at("excitation"), "excitation", cfg);
    if (j.contains("trajectory_file")) {
      if (!j.at("trajectory_file").is_string()) config_fail("trajectory_file", "expected a path string");
      cfg.trajectory_file = (base_dir / j.at("trajectory_file").get<std::string>()).lexically_normal();
    }
    if (j.contains("controller")) parse_controller(j.at("controller"), "controller", cfg.controller);
    if (j.contains("simulation")) {
      const Json& s = j.at("simulation");
      check_keys(s, {"dt", "cycles", "sample_rate"}, "simulation");
      read(s, "dt", "simulation", cfg.simulation.dt);
      read(s, "cycles", "simulation", cfg.simulation.cycles);
      read(s, "sample_rate", "simulation", cfg.simulation.sample_rate);
    }
    if (j.contains("noise")) {
      const Json& s = j.at("noise");
      check_keys(s, {"position_sigma", "angle_sigma_deg"}, "noise");
      read(s, "position_sigma", "noise", cfg.noise.position_sigma);
      double deg = cfg.noise.angle_sigma * 180.0 / std::numbers::pi;
      read(s, "angle_sigma_deg", "noise", deg);
      cfg.noise.angle_sigma = deg * std::numbers::pi / 180.0;
    }
    if (j.contains("estimation")) {
      const Json& s = j.at("estimation");
      check_keys(s, {"n_min", "n_max"}, "estimation");
      read(s, "n_min", "estimation", cfg.estimation.n_min);
      read(s, "n_max", "estimation", cfg.estimation.n_max);
    }
    if (j.contains("saturation_study")) {
      const Json& s = j.at("saturation_study");
      check_keys(s, {"levels"}, "saturation_study");
      if (s.contains("levels")) {
        const Json& l = s.at("levels");
        if (!l.is_array()) config_fail("saturation_study.levels", "expected an array");
        cfg.saturation_levels.clear();
        for (const auto& v : l) {
          cfg.saturation_levels.push_back(v.is_null() ? std::numeric_limits<double>::infinity()
                                                      : as_number(v, "saturation_study.levels"));
        }
      }
    }
    if (j.contains("compare_criteria")) {
      const Json& s = j.at("compare_criteria");
      check_keys(s, {"trajectories_per_criterion", "loads"}, "compare_criteria");
      read(s, "trajectories_per_criterion", "compare_criteria", cfg.trajectories_per_criterion);
      if (s.contains("loads")) {
        const Json& l = s.at("loads");
        if (!l.is_array() || l.empty()) config_fail("compare_criteria.loads", "expected a non-empty array");
        cfg.criteria_loads.clear();
        for (std::size_t i = 0; i < l.size(); ++i) {
          cfg.criteria_loads.push_back(parse_load(l[i], "compare_criteria.loads[" + std::to_string(i) + "]"));
        }
      }
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::config, std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) throw;
    throw Error(ErrorKind::config, e.what());
  }
  cfg.controller.nominal = cfg.nominal;
  cfg.excitation.sigma = wrench_covariance(cfg.A, cfg.sigma_u);
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const fs::path& path) {
  const std::string text = read_text_file(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::config, "config '" + path.string() + "': " + e.what());
  }
  return parse_config(j, path.parent_path());
}

Json config_to_json(const ScenarioConfig& cfg) {
  Json j;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir.string();
  j["parallel"] = cfg.execution == Execution::parallel;
  j["robot"] = {{"pi", json_vector(cfg.robot.to_vector())}};
  j["true_params"] = {{"pi", json_vector(cfg.truth.to_vector())}};
  j["nominal"] = cfg.nominal_is_truth ? Json("true") : Json{{"pi", json_vector(cfg.nominal.to_vector())}};
  Json A = Json::array();
  for (int r = 0; r < 6; ++r) A.push_back(json_vector(cfg.A.matrix().row(r).transpose()));
  j["actuation_matrix"] = A;
  j["actuator_bounds"] = {{"lower", bound_json(cfg.controller.bounds.lower)},
                          {"upper", bound_json(cfg.controller.bounds.upper)}};
  const ExcitationConfig& e = cfg.excitation;
  auto symmetric_limit = [](const Vec6& hi, int first) { return hi(first); };
  j["excitation"] = {{"period", e.period},
                     {"harmonics", e.harmonics},
                     {"criterion", to_string(e.criterion)},
                     {"samples", e.samples},
                     {"multistart", e.multistart},
                     {"local_iterations", e.local_iterations},
                     {"sigma_u", cfg.sigma_u},
                     {"bounds",
                      {{"position", symmetric_limit(e.bounds.x_max, 0)},
                       {"angle", symmetric_limit(e.bounds.x_max, 3)},
                       {"velocity", symmetric_limit(e.bounds.v_max, 0)},
                       {"rate", symmetric_limit(e.bounds.v_max, 3)},
                       {"acceleration", symmetric_limit(e.bounds.a_max, 0)},
                       {"angular_acceleration", symmetric_limit(e.bounds.a_max, 3)}}}};
  if (cfg.trajectory_file) j["trajectory_file"] = cfg.trajectory_file->string();
  const ControllerConfig& c = cfg.controller;
  j["controller"] = {{"type", c.type == ControllerType::receding_horizon ? "mpc" : "pd"},
                     {"period", c.period},
                     {"horizon", c.horizon},
                     {"iterations", c.iterations},
                     {"blocks", c.blocks},
                     {"weights", {{"Q", json_vector(c.Q)}, {"Q_N", json_vector(c.Q_N)}, {"P", json_vector(c.P)}}},
                     {"gains", {{"kp", c.kp}, {"kd", c.kd}, {"kr", c.kr}, {"kw", c.kw}}}};
  j["simulation"] = {{"dt", cfg.simulation.dt},
                     {"cycles", cfg.simulation.cycles},
                     {"sample_rate", cfg.simulation.sample_rate}};
  j["noise"] = {{"position_sigma", cfg.noise.position_sigma},
                {"angle_sigma_deg", cfg.noise.angle_sigma * 180.0 / std::numbers::pi}};
  j["estimation"] = {{"n_min", cfg.estimation.n_min}, {"n_max", cfg.estimation.n_max}};
  Json levels = Json::array();
  for (double l : cfg.saturation_levels) levels.push_back(std::isfinite(l) ? Json(l) : Json(nullptr));
  j["saturation_study"] = {{"levels", levels}};
  Json loads = Json::array();
  for (const auto& l : cfg.criteria_loads) loads.push_back(load_json(l));
  j["compare_criteria"] = {{"trajectories_per_criterion", cfg.trajectories_per_criterion}, {"loads", loads}};
  return j;
}

// ---------------------------------------------------------------------------
// Drivers

Error stage_error(const std::string& stage, const Error& e) {
  return Error(e.kind(), "stage " + stage + ": " + e.what());
}

namespace {

template <typename F>
auto in_stage(const std::string& stage, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw stage_error(stage, e);
  }
}

/// Runs body(i) for i in [0, count), concurrently when asked. The first
/// failure by index is rethrown after all iterations finish.
template <typename F>
void for_each_index(int count, Execution exec, F&& body) {
  std::vector<std::exception_ptr> errors(count);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < count; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    for (int i = 0; i < count; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

ControllerConfig controller_for(const ScenarioConfig& cfg) {
  ControllerConfig c = cfg.controller;
  c.nominal = cfg.nominal_is_truth ? cfg.truth : cfg.nominal;
  return c;
}

int best_by_composite(const HarmonicSelection& sel) {
  int best = -1;
  double best_err = std::numeric_limits<double>::infinity();
  for (const auto& c : sel.candidates) {
    if (c.errors && c.errors->composite() < best_err) {
      best_err = c.errors->composite();
      best = c.n;
    }
  }
  return best;
}

}  // namespace

FourierTrajectory scenario_trajectory(const ScenarioConfig& cfg) {
  return in_stage("trajectory", [&] {
    if (cfg.trajectory_file) {
      if (!fs::exists(*cfg.trajectory_file)) {
        throw Error(ErrorKind::config, "trajectory file '" + cfg.trajectory_file->string() + "' does not exist");
      }
      return load_trajectory(*cfg.trajectory_file);
    }
    return optimize_trajectory(cfg.excitation, derive_seed(cfg.seed, "excitation"), cfg.execution).trajectory;
  });
}

MeasurementLog scenario_log(const ScenarioConfig& cfg, const FourierTrajectory& traj) {
  return in_stage("tracking", [&] {
    return track_trajectory(controller_for(cfg), cfg.A, cfg.truth, traj, cfg.simulation, cfg.noise,
                            derive_seed(cfg.seed, "tracking"));
  });
}

EstimationResult scenario_estimate(const ScenarioConfig& cfg, const MeasurementLog& log) {
  return in_stage("estimation", [&] {
    EstimationConfig ec = cfg.estimation;
    ec.execution = cfg.execution;
    return estimate_from_log(log, cfg.A, ec, cfg.truth);
  });
}

FullRun run_full(const ScenarioConfig& cfg) {
  FullRun run;
  run.trajectory = scenario_trajectory(cfg);
  run.log = scenario_log(cfg, run.trajectory);
  run.result = scenario_estimate(cfg, run.log);
  return run;
}

void write_full_run(const fs::path& dir, const FullRun& run) {
  in_stage("output", [&] {
    save_trajectory(dir / "trajectory.json", run.trajectory);
    save_log(dir / "log.csv", run.log);
    save_result(dir / "result.json", run.result);
    save_table(dir / "sweep.csv", sweep_table(run.result.selection));
    save_table(dir / "energy.csv", energy_table(run.result.selection.selected().energy));
    save_table(dir / "tracking.csv", tracking_table(run.log, run.trajectory));
    return 0;
  });
}

std::vector<SaturationRow> run_saturation_study(const ScenarioConfig& cfg, const std::vector<double>& levels) {
  if (levels.size() < 3) throw Error(ErrorKind::config, "saturation study needs at least three bound levels");
  const FourierTrajectory traj = scenario_trajectory(cfg);
  std::vector<SaturationRow> rows(levels.size());
  for_each_index(static_cast<int>(levels.size()), cfg.execution, [&](int i) {
    ScenarioConfig c = cfg;
    if (cfg.execution == Execution::parallel) c.execution = Execution::serial;
    c.controller.bounds =
        std::isfinite(levels[i]) ? ActuatorBounds::symmetric(levels[i]) : ActuatorBounds::unbounded();
    const MeasurementLog log = scenario_log(c, traj);
    SaturationRow& row = rows[i];
    row.bound = levels[i];
    row.saturation_fraction = log.meta.saturation_fraction;
    EstimationResult r;
    try {
      r = scenario_estimate(c, log);
    } catch (const Error& e) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.failure = e.what();
      row.at_n_star = row.at_best_n = {nan, nan, nan, nan, nan, nan};
      return;
    }
    row.n_star = r.n_star;
    row.at_n_star = *r.errors;
    row.best_n = best_by_composite(r.selection);
    row.at_best_n = *r.selection.at(row.best_n).errors;
  });
  return rows;
}

std::vector<CriteriaRow> run_compare_criteria(const ScenarioConfig& cfg) {
  const int k = cfg.trajectories_per_criterion;
  const Criterion criteria[2] = {Criterion::J1, Criterion::J2};
  std::vector<FourierTrajectory> trajectories(2 * k);
  for_each_index(2 * k, cfg.execution, [&](int i) {
    ExcitationConfig e = cfg.excitation;
    e.criterion = criteria[i / k];
    trajectories[i] = in_stage("trajectory", [&] {
      return optimize_trajectory(e, derive_seed(cfg.seed, std::string("criteria-") + to_string(e.criterion), i % k),
                                 Execution::serial)
          .trajectory;
    });
  });

  const int loads = static_cast<int>(cfg.criteria_loads.size());
  std::vector<CriteriaCase> cases(2 * k * loads);
  for_each_index(static_cast<int>(cases.size()), cfg.execution, [&](int i) {
    const int t = i / loads;
    const LoadSpec& load = cfg.criteria_loads[i % loads];
    ScenarioConfig c = cfg;
    c.execution = Execution::serial;
    c.truth = attach_load(cfg.robot, load.mass, load.position, load.inertia);
    const MeasurementLog log = scenario_log(c, trajectories[t]);
    CriteriaCase& cc = cases[i];
    cc.criterion = criteria[t / k];
    cc.trajectory = t % k;
    cc.load = load.name;
    cc.truth = c.truth;
    cc.result = scenario_estimate(c, log);
  });
  return compare_criteria(cases);
}

CsvTable saturation_table(const std::vector<SaturationRow>& rows) {
  CsvTable t;
  t.header = {"bound",
              "saturation_fraction",
              "n_star",
              "mass_error_n_star",
              "inertia_rmse_n_star",
              "offset_error_n_star",
              "composite_n_star",
              "best_n",
              "mass_error_best",
              "inertia_rmse_best",
              "offset_error_best",
              "composite_best",
              "estimated"};
  for (const auto& r : rows) {
    t.rows.push_back({r.bound, r.saturation_fraction, static_cast<double>(r.n_star), r.at_n_star.mass,
                      r.at_n_star.inertia_rmse, r.at_n_star.offset, r.at_n_star.composite(),
                      static_cast<double>(r.best_n), r.at_best_n.mass, r.at_best_n.inertia_rmse, r.at_best_n.offset,
                      r.at_best_n.composite(), r.failure.empty() ? 1.0 : 0.0});
  }
  return t;
}

namespace {

const std::vector<std::string> kCriteriaHeader = {
    "criterion",    "trajectory",        "load",          "n_star",           "mass_error",
    "inertia_rmse", "offset_error_norm", "mass_relative", "inertia_relative", "offset_relative"};

}  // namespace

std::string criteria_csv(const std::vector<CriteriaRow>& rows) {
  std::string out;
  for (std::size_t i = 0; i < kCriteriaHeader.size(); ++i) out += (i ? "," : "") + kCriteriaHeader[i];
  out += '\n';
  for (const auto& r : rows) {
    out += std::string(to_string(r.criterion)) + ',' + std::to_string(r.trajectory) + ',' + r.load + ',' +
           std::to_string(r.n_star);
    for (double v : {r.errors.mass, r.errors.inertia_rmse, r.errors.offset, r.errors.mass_relative,
                     r.errors.inertia_relative, r.errors.offset_relative}) {
      out += ',' + format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::vector<CriteriaRow> parse_criteria_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::vector<CriteriaRow> rows;
  if (!std::getline(is, line)) throw Error(ErrorKind::invalid_input, "criteria table has no header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != kCriteriaHeader.size()) {
      throw Error(ErrorKind::invalid_input, "criteria row has " + std::to_string(cells.size()) + " cells");
    }
    CriteriaRow r;
    r.criterion = criterion_from_string(cells[0]);
    r.trajectory = static_cast<int>(parse_double(cells[1]));
    r.load = cells[2];
    r.n_star = static_cast<int>(parse_double(cells[3]));
    r.errors.mass = parse_double(cells[4]);
    r.errors.inertia_rmse = parse_double(cells[5]);
    r.errors.offset = parse_double(cells[6]);
    r.errors.mass_relative = parse_double(cells[7]);
    r.errors.inertia_relative = parse_double(cells[8]);
    r.errors.offset_relative = parse_double(cells[9]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace ffid
