#pragma once

/**
 * @file regressor.hpp
 * @brief Newton-Euler regressor γ such that γ(X, Ẋ, Ẍ) π = (F; M).
 *
 *        [ R⁻¹p̈_c   S(ω̇) + S(ω)S(ω)    0₃ₓ₆               ]
 *    γ = [ 0₃ₓ₁     −S(R⁻¹p̈_c)         [*ω̇] + S(ω)[*ω]    ]
 *
 * with π = (m, m p_off, J_xx, J_xy, J_xz, J_yy, J_yz, J_zz) about P_c.
 */

#include <span>
#include <vector>

#include "ffid/common.hpp"
#include "ffid/dynamics.hpp"

namespace ffid {

using RegressorRow = Eigen::Matrix<double, 6, 10>;

/// S(v) w = v × w.
Mat3 skew(const Vec3& v);

/// [*ω] such that [*ω] (J_xx, J_xy, J_xz, J_yy, J_yz, J_zz)ᵀ = J ω.
Eigen::Matrix<double, 3, 6> star_omega(const Vec3& omega);

/// a_c is the inertial acceleration of the body-frame origin.
RegressorRow regressor_row(const Mat3& R, const Vec3& omega, const Vec3& alpha, const Vec3& a_c);

/// Orientation and body rates obtained from Z-Y-X Euler angles.
struct EulerKinematics {
  Mat3 R = Mat3::Identity();
  Vec3 omega = Vec3::Zero();
  Vec3 alpha = Vec3::Zero();
};

/// R = Rz(ψ) Ry(θ) Rx(φ); angles, rates and accelerations ordered (φ, θ, ψ).
/// Throws gimbal_proximity when |cos θ| < 1e-3.
EulerKinematics euler_kinematics(const Vec3& angles, const Vec3& rates, const Vec3& accels);

Mat3 rotation_from_euler(const Vec3& angles);
/// Inverse of rotation_from_euler with θ in [−π/2, π/2].
Vec3 euler_from_rotation(const Mat3& R);

/// Everything the regressor and the energy balance need at one instant.
struct KinematicSample {
  Mat3 R = Mat3::Identity();
  Vec3 velocity = Vec3::Zero();      ///< ṗ_c, inertial
  Vec3 acceleration = Vec3::Zero();  ///< p̈_c, inertial
  Vec3 omega = Vec3::Zero();
  Vec3 alpha = Vec3::Zero();
};

/// Pose, rates and accelerations ordered (x, y, z, φ, θ, ψ).
KinematicSample kinematic_sample(const Vec6& X, const Vec6& Xdot, const Vec6& Xddot);

RegressorRow regressor_row(const KinematicSample& k);

struct StackedSystem {
  Eigen::MatrixXd W;  ///< 6N x 10
  Eigen::VectorXd b;  ///< 6N
  int samples = 0;
  int rank = 0;
  Eigen::VectorXd singular_values;  ///< descending

  bool full_rank() const { return rank == 10; }
};

/// Relative singular-value threshold used for the rank of W.
inline constexpr double kRankTolerance = 1e-10;

/// Row-stacks (γ_i, τ_i) in sample order and records the numerical rank.
StackedSystem assemble(std::span<const RegressorRow> rows, std::span<const Wrench> wrenches);

/// Builds and stacks the rows for every sample. The parallel path fills rows
/// by index, so both paths give identical matrices.
StackedSystem stack_regressor(std::span<const KinematicSample> kin, std::span<const Wrench> wrenches,
                              Execution exec = Execution::parallel);

/// Fills rank and singular values of an already stacked system.
void update_rank(StackedSystem& sys);

}  // namespace ffid
