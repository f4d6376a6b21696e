#pragma once

/**
 * @file dynamics.hpp
 * @brief Rigid-body model of a free-flyer whose centre of mass is offset
 *        from the body-frame origin.
 *
 * The body frame B is attached at P_c, the centre of mass of the robot before
 * grasping. After grasping, the system centre of mass P_s sits at p_off
 * (body frame) from P_c. With R the body-to-inertial rotation:
 *
 *   m { p̈_c + R (ω̇ × p_off + ω × (ω × p_off)) } = R F
 *   J_s ω̇ + ω × J_s ω + p_off × F = M
 *
 * There is no gravity term; the model targets the interior of an orbiting
 * station.
 */

#include "ffid/common.hpp"

namespace ffid {

/// Symmetric 3x3 matrix from (xx, xy, xz, yy, yz, zz).
Mat3 symmetric_from_components(const Vec6& c);
Vec6 components_from_symmetric(const Mat3& m);

/// Mass, first moment m·p_off and inertia about the body-frame origin P_c.
/// The ordering of to_vector() is the 10-vector π used by the regressor.
struct InertialParams {
  double mass = 1.0;
  Vec3 first_moment = Vec3::Zero();
  Vec6 inertia_c = Vec6::Zero();  ///< J_xx, J_xy, J_xz, J_yy, J_yz, J_zz about P_c

  static InertialParams from_vector(const Vec10& pi);
  /// Builds parameters from inertia J_s about the system centre of mass.
  static InertialParams from_com(double mass, const Vec3& p_off, const Mat3& J_s);

  Vec10 to_vector() const;
  Vec3 p_off() const { return first_moment / mass; }
  Mat3 J_c() const { return symmetric_from_components(inertia_c); }
  Mat3 J_s() const;

  /// Physicality flags. Estimates may violate them; ground truth must not.
  bool mass_positive() const { return std::isfinite(mass) && mass > 0.0; }
  bool inertia_positive_definite() const;

  /// Throws inconsistent_parameters unless m > 0 and both J_c and J_s are PD.
  void validate() const;
};

/// Adds a rigid attachment (mass, centre position in body frame, own inertia
/// about its centre) to a base whose centre of mass is at the origin.
InertialParams attach_load(const InertialParams& base, double load_mass, const Vec3& load_position,
                           const Mat3& load_inertia = Mat3::Zero());

Mat3 parallel_axis(const Mat3& J_s, double mass, const Vec3& p_off);
/// Throws inconsistent_parameters if the result is not positive definite.
Mat3 parallel_axis_inv(const Mat3& J_c, double mass, const Vec3& p_off);

struct RigidBodyState {
  Vec3 position = Vec3::Zero();  ///< p_c, inertial
  Vec3 velocity = Vec3::Zero();  ///< ṗ_c, inertial
  Quat attitude = Quat::Identity();  ///< body to inertial
  Vec3 omega = Vec3::Zero();  ///< body frame
};

struct Wrench {
  Vec3 force = Vec3::Zero();   ///< body frame, N
  Vec3 moment = Vec3::Zero();  ///< body frame, N·m

  static Wrench from_vector(const Vec6& w) { return {w.head<3>(), w.tail<3>()}; }
  Vec6 to_vector() const {
    Vec6 w;
    w << force, moment;
    return w;
  }
};

/// Inertial-frame acceleration of P_c and body-frame angular acceleration.
struct Acceleration {
  Vec3 linear = Vec3::Zero();
  Vec3 angular = Vec3::Zero();
};

/// Per-channel actuator limits.
struct ActuatorBounds {
  Vec6 lower = Vec6::Constant(-1.0);
  Vec6 upper = Vec6::Constant(1.0);

  static ActuatorBounds symmetric(double limit) {
    return {Vec6::Constant(-limit), Vec6::Constant(limit)};
  }
  static ActuatorBounds unbounded();
};

struct ActuatorCommand {
  Vec6 u = Vec6::Zero();
  bool saturated = false;  ///< at least one channel sits on a bound
};

/// Clamps u into the bounds and flags whether any channel was clamped.
ActuatorCommand saturate(const Vec6& u, const ActuatorBounds& bounds);

/// The 6x6 mixing matrix mapping motor inputs to body wrench.
class ActuationMatrix {
 public:
  /// Throws invalid_input if the matrix is not finite or not invertible.
  explicit ActuationMatrix(const Mat6& A);

  /// Illustrative hexarotor-like layout with tilted propellers; |u| <= 1 spans
  /// roughly ±5 N and ±1 N·m. Not the geometry of any particular vehicle.
  static ActuationMatrix illustrative();

  const Mat6& matrix() const { return A_; }
  const Mat6& inverse() const { return A_inv_; }
  double condition_number() const { return cond_; }

  Wrench wrench(const Vec6& u) const;
  Vec6 command_for(const Wrench& w) const { return A_inv_ * w.to_vector(); }

 private:
  Mat6 A_;
  Mat6 A_inv_;
  double cond_;
};

/// (F; M) = A u. Throws invalid_input on non-finite u.
Wrench wrench_from_actuation(const ActuationMatrix& A, const Vec6& u);

/// Throws singular_inertia when J_s cannot be inverted.
Acceleration forward_dynamics(const InertialParams& params, const RigidBodyState& state,
                              const Wrench& wrench);

Wrench inverse_dynamics(const InertialParams& params, const RigidBodyState& state,
                        const Acceleration& acc);

/// Precomputed model used inside tight loops (plant integration, MPC
/// rollouts). Equivalent to forward_dynamics.
class RigidBodyModel {
 public:
  explicit RigidBodyModel(const InertialParams& params);

  Acceleration accelerate(const RigidBodyState& state, const Wrench& wrench) const;
  /// One classical RK4 step with the wrench held constant; renormalizes q.
  RigidBodyState step(const RigidBodyState& state, const Wrench& wrench, double dt) const;

  const InertialParams& params() const { return params_; }

 private:
  InertialParams params_;
  double mass_;
  Vec3 p_off_;
  Mat3 J_s_;
  Mat3 J_s_inv_;
};

RigidBodyState integrate_step(const InertialParams& params, const RigidBodyState& state,
                              const Wrench& wrench, double dt);
RigidBodyState integrate_step(const InertialParams& params, const ActuationMatrix& A,
                              const RigidBodyState& state, const Vec6& u, double dt);

}  // namespace ffid
