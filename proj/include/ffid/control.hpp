#pragma once

/**
 * @file control.hpp
 * @brief Model-based trajectory tracking with stale nominal parameters and
 *        saturating actuators, plus the closed-loop simulation that produces
 *        measurement logs.
 */

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ffid/common.hpp"
#include "ffid/dynamics.hpp"
#include "ffid/measurement_log.hpp"
#include "ffid/trajectory.hpp"

namespace ffid {

/// e_R = ½ (R_dᵀ R − Rᵀ R_d)^∨
Vec3 attitude_error(const Quat& q_des, const Quat& q);
Vec3 attitude_error(const Mat3& R_des, const Mat3& R);

enum class ControllerType { receding_horizon, computed_wrench };

const char* to_string(ControllerType t);
ControllerType controller_type_from_string(const std::string& s);

/// Diagonal weights on the 12-dim tracking error
/// (position, velocity, attitude, angular rate; 3 each).
using ErrorWeights = Eigen::Matrix<double, 12, 1>;

ErrorWeights make_error_weights(double position, double velocity, double attitude, double rate);

struct ControllerConfig {
  ControllerType type = ControllerType::receding_horizon;
  InertialParams nominal;  ///< parameters the controller believes in
  ActuatorBounds bounds;
  double period = 0.02;   ///< dt_c, s
  double horizon = 1.0;   ///< t_h, s
  ErrorWeights Q = make_error_weights(10.0, 1.0, 10.0, 1.0);
  ErrorWeights Q_N = 10.0 * make_error_weights(10.0, 1.0, 10.0, 1.0);
  Vec6 P = Vec6::Constant(1e-4);
  int iterations = 2;             ///< Gauss-Newton iterations per control step
  std::vector<int> blocks = {2, 3, 5, 10, 10, 20};  ///< move blocking, in control periods

  // Computed-wrench (PD + feed-forward) gains.
  double kp = 25.0, kd = 10.0;
  double kr = 25.0, kw = 10.0;

  int horizon_steps() const;
  /// Throws config on invalid timing, weights or blocking.
  void validate() const;
};

/// Reference samples (X, Ẋ, Ẍ) at t0 + k dt for k = 0..K.
struct ReferenceWindow {
  double t0 = 0.0;
  double dt = 0.02;
  std::vector<TrajectorySample> samples;
};

ReferenceWindow reference_window(const FourierTrajectory& traj, double t0, double dt, int steps);

class TrackingController {
 public:
  virtual ~TrackingController() = default;
  /// Saturated command for the current state. Throws invalid_window when the
  /// window is shorter than the controller needs.
  virtual ActuatorCommand command(const RigidBodyState& state, const ReferenceWindow& window) = 0;
  virtual void reset() {}
  /// Reference samples the controller needs beyond t0.
  virtual int window_steps() const = 0;
};

/// Single-shooting receding-horizon controller. Inputs are move-blocked,
/// optimised by projected Gauss-Newton over the nominal model and
/// warm-started from the previous solution.
class RecedingHorizonController : public TrackingController {
 public:
  RecedingHorizonController(const ControllerConfig& cfg, const ActuationMatrix& A);

  ActuatorCommand command(const RigidBodyState& state, const ReferenceWindow& window) override;
  void reset() override;
  int window_steps() const override { return steps_; }

  /// Cost Σ‖e‖²_Q + ‖u‖²_P + ‖e_K‖²_{Q_N} of the current plan (after command()).
  double last_cost() const { return last_cost_; }

 private:
  struct RefPoint {
    Vec3 p, v, w;
    Mat3 R;
  };

  Eigen::VectorXd residual(const RigidBodyState& x0, const std::vector<RefPoint>& ref,
                           const Eigen::VectorXd& z) const;
  Eigen::VectorXd clamp(const Eigen::VectorXd& z) const;

  ControllerConfig cfg_;
  ActuationMatrix A_;
  RigidBodyModel model_;
  int steps_;
  std::vector<int> block_of_step_;
  Eigen::VectorXd z_;
  ErrorWeights sqrt_Q_, sqrt_QN_;
  double last_cost_ = 0.0;
};

/// Inverse dynamics on the nominal model with PD correction, u = A⁻¹ w, clamped.
class ComputedWrenchController : public TrackingController {
 public:
  ComputedWrenchController(const ControllerConfig& cfg, const ActuationMatrix& A);

  ActuatorCommand command(const RigidBodyState& state, const ReferenceWindow& window) override;
  int window_steps() const override { return 0; }

 private:
  ControllerConfig cfg_;
  ActuationMatrix A_;
};

std::unique_ptr<TrackingController> make_controller(const ControllerConfig& cfg, const ActuationMatrix& A);

/// Additive white Gaussian noise on the logged pose.
struct NoiseModel {
  double position_sigma = 0.002;                          ///< m
  double angle_sigma = 0.2 * 3.14159265358979323846 / 180.0;  ///< rad

  static NoiseModel none() { return {0.0, 0.0}; }
};

struct SimulationConfig {
  double dt = 0.001;           ///< plant integration step
  double sample_rate = 100.0;  ///< f_s
  int cycles = 10;             ///< C

  void validate(double period, double control_period) const;
};

/// Simulates the true plant under the controller for C periods of the
/// reference, starting at rest at X(0). The logged pose is exact; each row's
/// command is the mean command applied over [t_k, t_k + 1/f_s).
MeasurementLog simulate_closed_loop(const ControllerConfig& cfg, const ActuationMatrix& A,
                                    const InertialParams& truth, const FourierTrajectory& traj,
                                    const SimulationConfig& sim);

/// Adds pose noise from an independent stream. Deterministic in the seed.
MeasurementLog add_measurement_noise(const MeasurementLog& clean, const NoiseModel& noise, std::uint64_t seed);

/// simulate_closed_loop followed by add_measurement_noise.
MeasurementLog track_trajectory(const ControllerConfig& cfg, const ActuationMatrix& A,
                                const InertialParams& truth, const FourierTrajectory& traj,
                                const SimulationConfig& sim, const NoiseModel& noise, std::uint64_t seed);

/// A log of perfect tracking: poses sampled from the reference and inputs
/// from exact inverse dynamics of the truth at each sample instant.
MeasurementLog ideal_tracking_log(const InertialParams& truth, const ActuationMatrix& A,
                                  const FourierTrajectory& traj, int cycles, double sample_rate);

}  // namespace ffid
