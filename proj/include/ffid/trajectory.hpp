#pragma once

/**
 * @file trajectory.hpp
 * @brief Periodic band-limited excitation trajectories and their design.
 *
 * Each of the six coordinates X = (x, y, z, φ, θ, ψ) is a truncated Fourier
 * series written at velocity level:
 *
 *   X_i(t)  = a_i0 + Σ_k  a_ik/(ω_f k) sin(ω_f k t) − b_ik/(ω_f k) cos(ω_f k t)
 *   Ẋ_i(t)  =        Σ_k  a_ik cos(ω_f k t) + b_ik sin(ω_f k t)
 *   Ẍ_i(t)  =        Σ_k −a_ik ω_f k sin(ω_f k t) + b_ik ω_f k cos(ω_f k t)
 */

#include <array>
#include <cstdint>
#include <vector>

#include "ffid/common.hpp"
#include "ffid/dynamics.hpp"
#include "ffid/regressor.hpp"

namespace ffid {

struct AxisSeries {
  double a0 = 0.0;
  Eigen::VectorXd a;  ///< a_i1 .. a_in
  Eigen::VectorXd b;  ///< b_i1 .. b_in

  bool operator==(const AxisSeries& o) const { return a0 == o.a0 && a == o.a && b == o.b; }
};

struct FourierTrajectory {
  double omega_f = 1.0;
  int harmonics = 0;
  std::array<AxisSeries, 6> axes;

  static FourierTrajectory zero(double omega_f, int harmonics);
  double period() const;

  /// Coefficient vector δ, axis-major, each axis laid out (a0, a1..an, b1..bn).
  Eigen::VectorXd coefficients() const;
  static FourierTrajectory from_coefficients(double omega_f, int harmonics, const Eigen::VectorXd& delta);

  bool operator==(const FourierTrajectory& o) const {
    return omega_f == o.omega_f && harmonics == o.harmonics && axes == o.axes;
  }
};

struct TrajectorySample {
  Vec6 X = Vec6::Zero();
  Vec6 Xdot = Vec6::Zero();
  Vec6 Xddot = Vec6::Zero();
};

TrajectorySample eval(const FourierTrajectory& traj, double t);

/// Box limits on pose, rate and acceleration, each ordered (x, y, z, φ, θ, ψ).
struct MotionBounds {
  Vec6 x_min, x_max;
  Vec6 v_min, v_max;
  Vec6 a_min, a_max;

  /// ±0.5 m, ±0.4 rad, ±0.5 m/s, ±0.5 rad/s, ±1 m/s², ±1 rad/s².
  static MotionBounds defaults();
  static MotionBounds symmetric(double pos, double ang, double vel, double rate, double acc, double ang_acc);
};

enum class Criterion { J1, J2 };

const char* to_string(Criterion c);
Criterion criterion_from_string(const std::string& s);

struct ExcitationConfig {
  double period = 10.0;  ///< T_f, s
  int harmonics = 3;
  MotionBounds bounds = MotionBounds::defaults();
  Criterion criterion = Criterion::J1;
  Mat6 sigma = Mat6::Identity();  ///< wrench noise covariance Σ
  int samples = 100;              ///< collocation samples per period
  int multistart = 24;
  int local_iterations = 40;      ///< quasi-Newton iterations per penalty stage

  double omega_f() const;
  /// Throws config on non-positive period, N < 10 n, non-finite bounds, etc.
  void validate() const;
};

/// Σ = A diag(σ_u²) Aᵀ.
Mat6 wrench_covariance(const ActuationMatrix& A, double sigma_u);

/// Regressor of the reference kinematics at N uniform samples of one period
/// (b left at zero).
StackedSystem trajectory_regressor(const FourierTrajectory& traj, int samples);

/// cond(Σ^(−1/2) W), blockwise per sample. +∞ when rank deficient.
double criterion_J1(const Eigen::MatrixXd& W, const Mat6& sigma);
/// −log |Wᵀ Σ⁻¹ W| via QR of the normalised regressor. +∞ when singular.
double criterion_J2(const Eigen::MatrixXd& W, const Mat6& sigma);
double evaluate_criterion(Criterion c, const Eigen::MatrixXd& W, const Mat6& sigma);

/// Worst bound violation over the N collocation samples (0 when feasible).
double max_bound_violation(const FourierTrajectory& traj, const MotionBounds& bounds, int samples);

/// Rest boundary conditions X(0) = Ẋ(0) = Ẍ(0) = 0 per axis, as an
/// orthonormal null-space basis over one axis' coefficients.
Eigen::MatrixXd rest_nullspace(double omega_f, int harmonics);

struct ExcitationResult {
  FourierTrajectory trajectory;
  double criterion = 0.0;
  int best_start = -1;
  int feasible_starts = 0;
};

/// Multistart penalty search. Starts are independent and seeded from (seed,
/// start index); the reduction picks the lowest criterion, ties to the lowest
/// index, so serial and parallel execution agree bitwise.
/// Throws infeasible_config when no start yields a full-rank feasible design.
ExcitationResult optimize_trajectory(const ExcitationConfig& cfg, std::uint64_t seed,
                                     Execution exec = Execution::parallel);

/// A random δ in [−1, 1] projected onto the rest constraints and scaled into
/// the motion bounds. This is the starting point of each multistart run.
FourierTrajectory random_feasible_trajectory(const ExcitationConfig& cfg, std::uint64_t seed);

}  // namespace ffid
