#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "ffid/energy.hpp"
#include "ffid/signal.hpp"
#include "test_support.hpp"

namespace ffid {
namespace {

KinematicSample sample_of(const RigidBodyState& s, const Acceleration& a) {
  KinematicSample k;
  k.R = s.attitude.toRotationMatrix();
  k.velocity = s.velocity;
  k.omega = s.omega;
  k.acceleration = a.linear;
  k.alpha = a.angular;
  return k;
}

// ½ Vᵀ M V with the body twist V = (Rᵀṗ_c, ω) and the 6x6 spatial inertia about P_c.
double spatial_kinetic_energy(const InertialParams& p, const RigidBodyState& s) {
  Mat6 M = Mat6::Zero();
  const Mat3 c = skew(p.first_moment);
  M.topLeftCorner<3, 3>() = p.mass * Mat3::Identity();
  M.topRightCorner<3, 3>() = -c;
  M.bottomLeftCorner<3, 3>() = c;
  M.bottomRightCorner<3, 3>() = p.J_c();
  Vec6 V;
  V << s.attitude.toRotationMatrix().transpose() * s.velocity, s.omega;
  return 0.5 * V.dot(M * V);
}

TEST(KineticEnergy, PureTranslationAndPureSpin) {
  const InertialParams p = InertialParams::from_com(2.0, Vec3::Zero(), Vec3(0.1, 0.2, 0.3).asDiagonal());
  RigidBodyState s;
  s.velocity = Vec3(3.0, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(kinetic_energy(p, s), 9.0);
  s.velocity.setZero();
  s.omega = Vec3(0.0, 0.0, 2.0);
  EXPECT_DOUBLE_EQ(kinetic_energy(p, s), 0.6);
}

TEST(KineticEnergy, MatchesSpatialInertia) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const InertialParams p = testing::random_params(rng);
    const RigidBodyState s = testing::random_state(rng);
    const double ref = spatial_kinetic_energy(p, s);
    EXPECT_NEAR(kinetic_energy(p, s), ref, 1e-12 * std::max(1.0, ref));
  }
}

TEST(InputPower, Examples) {
  RigidBodyState s;
  s.velocity = Vec3(2.0, 0.0, 0.0);
  s.omega = Vec3(0.0, 0.0, 3.0);
  const Wrench w{Vec3(1.5, 7.0, 0.0), Vec3(0.0, 5.0, 0.5)};
  EXPECT_DOUBLE_EQ(input_power(w, s), 3.0 + 1.5);
  // Body force is rotated into the velocity frame.
  s.attitude = Quat(Eigen::AngleAxisd(M_PI / 2, Vec3::UnitZ()));
  EXPECT_NEAR(input_power(w, s), -7.0 * 2.0 + 1.5, 1e-14);
}

TEST(InputPower, ExpandedFormAgrees) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 200; ++i) {
    const InertialParams p = testing::random_params(rng);
    const RigidBodyState s = testing::random_state(rng);
    const Wrench w{testing::random_vec3(rng, 5.0), testing::random_vec3(rng, 1.0)};
    const KinematicSample k = sample_of(s, {});
    EXPECT_NEAR(input_power_expanded(w, k, p.p_off()), input_power(w, k), 1e-12);
  }
}

TEST(EnergyBalance, ExactWrenchClosesTheBalance) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const InertialParams p = testing::random_params(rng);
    const RigidBodyState s = testing::random_state(rng);
    const Acceleration a{testing::random_vec3(rng, 2.0), testing::random_vec3(rng, 2.0)};
    const Wrench w = inverse_dynamics(p, s, a);
    const double P = input_power(w, s);
    EXPECT_NEAR(energy_rate(p, s, a.linear, a.angular), P, 1e-11 * std::max(1.0, std::abs(P)));
  }
}

TEST(EnergyBalance, RateMatchesFiniteDifferenceOfIntegratedEnergy) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 20; ++i) {
    const InertialParams p = testing::random_params(rng);
    const RigidBodyState s = testing::random_state(rng);
    const Wrench w{testing::random_vec3(rng, 5.0), testing::random_vec3(rng, 1.0)};
    const RigidBodyModel model(p);
    const double h = 1e-4;
    const double dT = (kinetic_energy(p, model.step(s, w, h)) - kinetic_energy(p, model.step(s, w, -h))) / (2 * h);
    EXPECT_NEAR(dT, input_power(w, s), 1e-6 * std::max(1.0, std::abs(dT)));
  }
}

TEST(EnergyBalance, TorqueFreeMotionConservesEnergy) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    const InertialParams p = testing::random_params(rng);
    const RigidBodyState s = testing::random_state(rng);
    const Acceleration a = forward_dynamics(p, s, Wrench{});
    EXPECT_NEAR(energy_rate(p, s, a.linear, a.angular), 0.0, 1e-11);
  }
}

std::vector<KinematicSample> trajectory_kinematics(const FourierTrajectory& traj, int N, double fs,
                                                   double shift) {
  std::vector<KinematicSample> kin(N);
  for (int j = 0; j < N; ++j) {
    const TrajectorySample s = eval(traj, shift + j / fs);
    kin[j] = kinematic_sample(s.X, s.Xdot, s.Xddot);
  }
  return kin;
}

std::vector<Wrench> exact_wrenches(const InertialParams& p, const std::vector<KinematicSample>& kin) {
  std::vector<Wrench> w;
  for (const KinematicSample& k : kin) {
    RigidBodyState s;
    s.attitude = Quat(k.R);
    s.velocity = k.velocity;
    s.omega = k.omega;
    w.push_back(inverse_dynamics(p, s, {k.acceleration, k.alpha}));
  }
  return w;
}

TEST(EnergyTrace, TruthHasZeroResidualAndOthersDoNot) {
  const InertialParams truth = attach_load(default_robot(), 1.2, Vec3(0.15, -0.10, 0.12));
  const FourierTrajectory traj = testing::reference_trajectory();
  const auto kin = trajectory_kinematics(traj, 1000, 100.0, 0.0);
  const auto w = exact_wrenches(truth, kin);
  const EnergyTrace good = energy_trace(truth, kin, w, 100.0);
  ASSERT_EQ(good.P.size(), 1000u);
  ASSERT_EQ(good.Tdot.size(), 1000u);
  EXPECT_DOUBLE_EQ(good.t[10], 0.1);
  EXPECT_LT(good.residual, 1e-12);
  const EnergyTrace stale = energy_trace(default_robot(), kin, w, 100.0);
  EXPECT_GT(stale.residual, 1e-4);
}

TEST(EnergyTrace, UnphysicalEstimateGivesInfiniteResidual) {
  const FourierTrajectory traj = testing::reference_trajectory();
  const auto kin = trajectory_kinematics(traj, 100, 10.0, 0.0);
  const auto w = exact_wrenches(default_robot(), kin);
  InertialParams bad = default_robot();
  bad.mass = -1.0;
  EnergyTrace t = energy_trace(bad, kin, w, 10.0);
  EXPECT_EQ(t.residual, std::numeric_limits<double>::infinity());
  EXPECT_TRUE(t.Tdot.empty());
  EXPECT_EQ(t.P.size(), 100u);
  bad = default_robot();
  bad.inertia_c(0) = -0.01;
  EXPECT_TRUE(std::isinf(energy_trace(bad, kin, w, 10.0).residual));
}

TEST(EnergyTrace, ResidualIsInvariantToCircularShift) {
  const InertialParams truth = attach_load(default_robot(), 1.2, Vec3(0.15, -0.10, 0.12));
  const FourierTrajectory traj = testing::reference_trajectory();
  const double fs = 100.0;
  const int N = 1000;
  const auto kin = trajectory_kinematics(traj, N, fs, 0.0);
  const auto w = exact_wrenches(truth, kin);
  const auto kin_shift = trajectory_kinematics(traj, N, fs, 137 / fs);
  std::vector<Wrench> w_shift(N);
  for (int j = 0; j < N; ++j) w_shift[j] = w[(j + 137) % N];
  const InertialParams other = default_robot();
  EXPECT_NEAR(energy_trace(other, kin_shift, w_shift, fs).residual, energy_trace(other, kin, w, fs).residual,
              1e-9);
}

TEST(EnergyTrace, MismatchedLengthsRaise) {
  std::vector<KinematicSample> kin(3);
  std::vector<Wrench> w(2);
  EXPECT_THROW(energy_trace(default_robot(), kin, w, 100.0), Error);
}

}  // namespace
}  // namespace ffid
