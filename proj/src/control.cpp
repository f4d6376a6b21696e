#include "ffid/control.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "ffid/random.hpp"
#include "ffid/regressor.hpp"

namespace ffid {

Vec3 attitude_error(const Mat3& R_des, const Mat3& R) {
  const Mat3 E = 0.5 * (R_des.transpose() * R - R.transpose() * R_des);
  return {E(2, 1), E(0, 2), E(1, 0)};
}

Vec3 attitude_error(const Quat& q_des, const Quat& q) {
  return attitude_error(q_des.toRotationMatrix(), q.toRotationMatrix());
}

const char* to_string(ControllerType t) {
  return t == ControllerType::receding_horizon ? "mpc" : "computed_wrench";
}

ControllerType controller_type_from_string(const std::string& s) {
  if (s == "mpc" || s == "receding_horizon") return ControllerType::receding_horizon;
  if (s == "pd" || s == "computed_wrench") return ControllerType::computed_wrench;
  throw Error(ErrorKind::config, "unknown controller type '" + s + "' (expected mpc or pd)");
}

ErrorWeights make_error_weights(double position, double velocity, double attitude, double rate) {
  ErrorWeights w;
  w << Vec3::Constant(position), Vec3::Constant(velocity), Vec3::Constant(attitude), Vec3::Constant(rate);
  return w;
}

int ControllerConfig::horizon_steps() const {
  return static_cast<int>(std::lround(horizon / period));
}

void ControllerConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::config, "controller: " + msg); };
  if (!(period > 0.0)) fail("control period must be positive");
  if (!(horizon >= period)) fail("horizon must be at least one control period");
  if (std::abs(horizon_steps() * period - horizon) > 1e-9) fail("horizon must be a multiple of the control period");
  if ((Q.array() < 0.0).any() || (Q_N.array() < 0.0).any() || (P.array() < 0.0).any()) {
    fail("weights must be non-negative");
  }
  if ((bounds.lower.array() > bounds.upper.array()).any()) fail("actuator lower bound exceeds upper bound");
  if (type == ControllerType::receding_horizon) {
    if (iterations < 1) fail("need at least one Gauss-Newton iteration");
    if (blocks.empty()) fail("move blocking must have at least one block");
    int total = 0;
    for (int b : blocks) {
      if (b < 1) fail("move-blocking lengths must be positive");
      total += b;
    }
    if (total != horizon_steps()) {
      std::ostringstream os;
      os << "move-blocking lengths sum to " << total << " but the horizon has " << horizon_steps() << " steps";
      fail(os.str());
    }
  }
  nominal.validate();
}

ReferenceWindow reference_window(const FourierTrajectory& traj, double t0, double dt, int steps) {
  ReferenceWindow w;
  w.t0 = t0;
  w.dt = dt;
  w.samples.resize(steps + 1);
  for (int k = 0; k <= steps; ++k) w.samples[k] = eval(traj, t0 + k * dt);
  return w;
}

// ---------------------------------------------------------------------------

RecedingHorizonController::RecedingHorizonController(const ControllerConfig& cfg, const ActuationMatrix& A)
    : cfg_(cfg), A_(A), model_(cfg.nominal), steps_(cfg.horizon_steps()) {
  cfg_.validate();
  for (int b = 0; b < static_cast<int>(cfg_.blocks.size()); ++b) {
    for (int k = 0; k < cfg_.blocks[b]; ++k) block_of_step_.push_back(b);
  }
  sqrt_Q_ = cfg_.Q.cwiseSqrt();
  sqrt_QN_ = cfg_.Q_N.cwiseSqrt();
  reset();
}

void RecedingHorizonController::reset() {
  z_ = Eigen::VectorXd::Zero(6 * static_cast<Eigen::Index>(cfg_.blocks.size()));
  z_ = clamp(z_);
}

Eigen::VectorXd RecedingHorizonController::clamp(const Eigen::VectorXd& z) const {
  Eigen::VectorXd out = z;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    out(i) = std::min(std::max(z(i), cfg_.bounds.lower(i % 6)), cfg_.bounds.upper(i % 6));
  }
  return out;
}

Eigen::VectorXd RecedingHorizonController::residual(const RigidBodyState& x0, const std::vector<RefPoint>& ref,
                                                    const Eigen::VectorXd& z) const {
  const auto nb = static_cast<int>(cfg_.blocks.size());
  std::vector<Wrench> wrench(nb);
  for (int b = 0; b < nb; ++b) wrench[b] = A_.wrench(z.segment<6>(6 * b));

  Eigen::VectorXd r(12 * steps_ + 6 * nb);
  RigidBodyState x = x0;
  for (int k = 0; k < steps_; ++k) {
    x = model_.step(x, wrench[block_of_step_[k]], cfg_.period);
    const RefPoint& d = ref[k];
    const Mat3 R = x.attitude.toRotationMatrix();
    Eigen::Matrix<double, 12, 1> e;
    e << x.position - d.p, x.velocity - d.v, attitude_error(d.R, R), x.omega - R.transpose() * d.R * d.w;
    r.segment<12>(12 * k) = (k + 1 == steps_ ? sqrt_QN_ : sqrt_Q_).cwiseProduct(e);
  }
  for (int b = 0; b < nb; ++b) {
    r.segment<6>(12 * steps_ + 6 * b) = (cfg_.P * cfg_.blocks[b]).cwiseSqrt().cwiseProduct(z.segment<6>(6 * b));
  }
  return r;
}

ActuatorCommand RecedingHorizonController::command(const RigidBodyState& state, const ReferenceWindow& window) {
  if (static_cast<int>(window.samples.size()) < steps_ + 1 || std::abs(window.dt - cfg_.period) > 1e-12) {
    std::ostringstream os;
    os << "reference window needs " << steps_ + 1 << " samples at " << cfg_.period << " s spacing, got "
       << window.samples.size() << " at " << window.dt << " s";
    throw Error(ErrorKind::invalid_window, os.str());
  }
  std::vector<RefPoint> ref(steps_);
  for (int k = 0; k < steps_; ++k) {
    const TrajectorySample& s = window.samples[k + 1];
    const EulerKinematics e = euler_kinematics(s.X.tail<3>(), s.Xdot.tail<3>(), s.Xddot.tail<3>());
    ref[k] = {s.X.head<3>(), s.Xdot.head<3>(), e.omega, e.R};
  }

  const auto nz = z_.size();
  Eigen::VectorXd z = z_;
  Eigen::VectorXd r = residual(state, ref, z);
  double cost = r.squaredNorm();
  Eigen::MatrixXd J(r.size(), nz);

  for (int it = 0; it < cfg_.iterations; ++it) {
    for (Eigen::Index j = 0; j < nz; ++j) {
      Eigen::VectorXd zp = z;
      const double h = 1e-6;
      zp(j) += h;
      J.col(j) = (residual(state, ref, zp) - r) / h;
    }
    Eigen::MatrixXd H = J.transpose() * J;
    H.diagonal().array() += 1e-9 * (1.0 + H.diagonal().maxCoeff());
    const Eigen::VectorXd step = -H.ldlt().solve(J.transpose() * r);

    bool improved = false;
    double s = 1.0;
    for (int ls = 0; ls < 5; ++ls, s *= 0.5) {
      const Eigen::VectorXd zt = clamp(z + s * step);
      const Eigen::VectorXd rt = residual(state, ref, zt);
      const double ct = rt.squaredNorm();
      if (ct < cost) {
        z = zt;
        r = rt;
        cost = ct;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  z_ = z;
  last_cost_ = cost;
  return saturate(z.head<6>(), cfg_.bounds);
}

// ---------------------------------------------------------------------------

ComputedWrenchController::ComputedWrenchController(const ControllerConfig& cfg, const ActuationMatrix& A)
    : cfg_(cfg), A_(A) {
  if (!(cfg_.period > 0.0)) throw Error(ErrorKind::config, "controller: control period must be positive");
  cfg_.nominal.validate();
}

ActuatorCommand ComputedWrenchController::command(const RigidBodyState& state, const ReferenceWindow& window) {
  if (window.samples.empty()) throw Error(ErrorKind::invalid_window, "reference window is empty");
  const TrajectorySample& s = window.samples.front();
  const EulerKinematics d = euler_kinematics(s.X.tail<3>(), s.Xdot.tail<3>(), s.Xddot.tail<3>());
  const Mat3 R = state.attitude.toRotationMatrix();
  const Mat3 Rrel = R.transpose() * d.R;

  Acceleration cmd;
  cmd.linear = s.Xddot.head<3>() + cfg_.kd * (s.Xdot.head<3>() - state.velocity) +
               cfg_.kp * (s.X.head<3>() - state.position);
  const Vec3 e_R = attitude_error(d.R, R);
  const Vec3 e_W = state.omega - Rrel * d.omega;
  cmd.angular = Rrel * d.alpha - state.omega.cross(Rrel * d.omega) - cfg_.kr * e_R - cfg_.kw * e_W;

  const Wrench w = inverse_dynamics(cfg_.nominal, state, cmd);
  return saturate(A_.command_for(w), cfg_.bounds);
}

std::unique_ptr<TrackingController> make_controller(const ControllerConfig& cfg, const ActuationMatrix& A) {
  if (cfg.type == ControllerType::receding_horizon) return std::make_unique<RecedingHorizonController>(cfg, A);
  return std::make_unique<ComputedWrenchController>(cfg, A);
}

// ---------------------------------------------------------------------------

namespace {

long steps_per(double interval, double dt, const char* what) {
  const double n = interval / dt;
  const long r = std::lround(n);
  if (r < 1 || std::abs(n - r) > 1e-6) {
    std::ostringstream os;
    os << what << " (" << interval << " s) must be a positive multiple of the integration step (" << dt << " s)";
    throw Error(ErrorKind::config, os.str());
  }
  return r;
}

Vec6 measured_pose(const RigidBodyState& s) {
  Vec6 pose;
  pose << s.position, euler_from_rotation(s.attitude.toRotationMatrix());
  return pose;
}

}  // namespace

void SimulationConfig::validate(double period, double control_period) const {
  if (!(dt > 0.0)) throw Error(ErrorKind::config, "simulation: integration step must be positive");
  if (cycles < 1) throw Error(ErrorKind::config, "simulation: need at least one cycle");
  if (!(sample_rate > 0.0)) throw Error(ErrorKind::config, "simulation: sample rate must be positive");
  steps_per(1.0 / sample_rate, dt, "sample interval");
  steps_per(control_period, dt, "control period");
  steps_per(period, 1.0 / sample_rate, "trajectory period");
}

MeasurementLog simulate_closed_loop(const ControllerConfig& cfg, const ActuationMatrix& A,
                                    const InertialParams& truth, const FourierTrajectory& traj,
                                    const SimulationConfig& sim) {
  const double T = traj.period();
  sim.validate(T, cfg.period);
  truth.validate();
  auto controller = make_controller(cfg, A);
  const RigidBodyModel plant(truth);

  const long per_sample = steps_per(1.0 / sim.sample_rate, sim.dt, "sample interval");
  const long per_control = steps_per(cfg.period, sim.dt, "control period");
  const long samples = static_cast<long>(sim.cycles) * steps_per(T, 1.0 / sim.sample_rate, "trajectory period");
  const long total = samples * per_sample;

  MeasurementLog log;
  log.meta.period = T;
  log.meta.cycles = sim.cycles;
  log.meta.sample_rate = sim.sample_rate;
  log.meta.control_period = cfg.period;
  log.meta.convention = InputConvention::zoh;
  log.meta.controller = to_string(cfg.type);
  log.t.resize(samples);
  log.pose.resize(samples, 6);
  log.u.resize(samples, 6);
  log.saturated.assign(samples, 0);

  RigidBodyState state;
  {
    const TrajectorySample s0 = eval(traj, 0.0);
    state.position = s0.X.head<3>();
    state.attitude = Quat(rotation_from_euler(s0.X.tail<3>()));
    state.velocity = s0.Xdot.head<3>();
    state.omega = euler_kinematics(s0.X.tail<3>(), s0.Xdot.tail<3>(), s0.Xddot.tail<3>()).omega;
  }

  ActuatorCommand current;
  Vec6 u_sum = Vec6::Zero();
  int sat_in_sample = 0;
  int control_steps = 0, saturated_steps = 0;
  const int window = controller->window_steps();

  for (long i = 0; i < total; ++i) {
    const double t = i * sim.dt;
    if (i % per_sample == 0) {
      const long row = i / per_sample;
      log.t[row] = row / sim.sample_rate;
      log.pose.row(row) = measured_pose(state).transpose();
    }
    if (i % per_control == 0) {
      current = controller->command(state, reference_window(traj, t, cfg.period, window));
      ++control_steps;
      if (current.saturated) {
        ++saturated_steps;
        sat_in_sample = 1;
      }
    }
    state = plant.step(state, A.wrench(current.u), sim.dt);
    u_sum += current.u;
    if ((i + 1) % per_sample == 0) {
      const long row = i / per_sample;
      log.u.row(row) = (u_sum / static_cast<double>(per_sample)).transpose();
      log.saturated[row] = sat_in_sample;
      u_sum.setZero();
      sat_in_sample = 0;
    }
  }
  log.meta.control_steps = control_steps;
  log.meta.saturated_steps = saturated_steps;
  log.meta.saturation_fraction = control_steps > 0 ? static_cast<double>(saturated_steps) / control_steps : 0.0;
  return log;
}

MeasurementLog add_measurement_noise(const MeasurementLog& clean, const NoiseModel& noise, std::uint64_t seed) {
  MeasurementLog log = clean;
  log.meta.noise_seed = seed;
  log.meta.position_sigma = noise.position_sigma;
  log.meta.angle_sigma = noise.angle_sigma;
  if (noise.position_sigma == 0.0 && noise.angle_sigma == 0.0) return log;
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index r = 0; r < log.pose.rows(); ++r) {
    for (int c = 0; c < 3; ++c) log.pose(r, c) += noise.position_sigma * normal(rng);
    for (int c = 3; c < 6; ++c) log.pose(r, c) += noise.angle_sigma * normal(rng);
  }
  return log;
}

MeasurementLog track_trajectory(const ControllerConfig& cfg, const ActuationMatrix& A,
                                const InertialParams& truth, const FourierTrajectory& traj,
                                const SimulationConfig& sim, const NoiseModel& noise, std::uint64_t seed) {
  MeasurementLog log = add_measurement_noise(simulate_closed_loop(cfg, A, truth, traj, sim), noise,
                                             derive_seed(seed, "measurement-noise"));
  log.meta.seed = seed;
  return log;
}

MeasurementLog ideal_tracking_log(const InertialParams& truth, const ActuationMatrix& A,
                                  const FourierTrajectory& traj, int cycles, double sample_rate) {
  const double T = traj.period();
  const long per_period = steps_per(T, 1.0 / sample_rate, "trajectory period");
  const long samples = cycles * per_period;

  MeasurementLog log;
  log.meta.period = T;
  log.meta.cycles = cycles;
  log.meta.sample_rate = sample_rate;
  log.meta.control_period = 1.0 / sample_rate;
  log.meta.convention = InputConvention::instantaneous;
  log.meta.controller = "ideal";
  log.t.resize(samples);
  log.pose.resize(samples, 6);
  log.u.resize(samples, 6);
  log.saturated.assign(samples, 0);
  for (long r = 0; r < samples; ++r) {
    const double t = r / sample_rate;
    const TrajectorySample s = eval(traj, t);
    const KinematicSample k = kinematic_sample(s.X, s.Xdot, s.Xddot);
    RigidBodyState st;
    st.attitude = Quat(k.R);
    st.velocity = k.velocity;
    st.omega = k.omega;
    const Wrench w = inverse_dynamics(truth, st, {k.acceleration, k.alpha});
    log.t[r] = t;
    log.pose.row(r) = s.X.transpose();
    log.u.row(r) = A.command_for(w).transpose();
  }
  return log;
}

}  // namespace ffid
