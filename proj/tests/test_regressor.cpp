#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "ffid/regressor.hpp"
#include "test_support.hpp"

namespace ffid {
namespace {

using testing::random_params;
using testing::random_state;
using testing::random_vec3;

TEST(Regressor, StarOmegaReproducesInertiaProduct) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const Vec6 c = (Vec6() << 0.3, 0.01, -0.02, 0.4, 0.03, 0.5).finished();
    const Vec3 w = random_vec3(rng, 2.0);
    EXPECT_LT((star_omega(w) * c - symmetric_from_components(c) * w).norm(), 1e-15);
  }
}

TEST(Regressor, SkewIsCrossProduct) {
  const Vec3 a(1.0, -2.0, 0.5), b(0.3, 0.7, -1.1);
  EXPECT_LT((skew(a) * b - a.cross(b)).norm(), 1e-15);
}

TEST(Regressor, MatchesInverseDynamics) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 500; ++i) {
    const InertialParams p = random_params(rng);
    const RigidBodyState s = random_state(rng);
    const Acceleration a{random_vec3(rng, 2.0), random_vec3(rng, 3.0)};
    const Wrench w = inverse_dynamics(p, s, a);
    const RegressorRow g = regressor_row(s.attitude.toRotationMatrix(), s.omega, a.angular, a.linear);
    const Vec6 lhs = g * p.to_vector();
    EXPECT_LT((lhs - w.to_vector()).norm(), 1e-9 * std::max(1.0, w.to_vector().norm()));
  }
}

TEST(Regressor, StationaryRowsOnlyExciteNothing) {
  const RegressorRow g = regressor_row(Mat3::Identity(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero());
  EXPECT_EQ(g.norm(), 0.0);
}

TEST(EulerKinematics, RotationRoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(-3.0, 3.0), pitch(-1.4, 1.4);
  for (int i = 0; i < 100; ++i) {
    const Vec3 e(ang(rng), pitch(rng), ang(rng));
    const Mat3 R = rotation_from_euler(e);
    EXPECT_LT((R.transpose() * R - Mat3::Identity()).norm(), 1e-14);
    EXPECT_LT((euler_from_rotation(R) - e).norm(), 1e-12);
  }
  const Mat3 Rz = rotation_from_euler(Vec3(0.0, 0.0, 0.3));
  EXPECT_LT((Rz - Eigen::AngleAxisd(0.3, Vec3::UnitZ()).toRotationMatrix()).norm(), 1e-15);
}

// ω from a central difference of R(t): S(ω) ≈ Rᵀ Ṙ; α from a difference of ω.
TEST(EulerKinematics, RatesMatchFiniteDifferences) {
  auto angles = [](double t) { return Vec3(0.3 * std::sin(t), 0.2 * std::cos(1.3 * t), 0.5 * std::sin(0.7 * t)); };
  auto rates = [](double t) {
    return Vec3(0.3 * std::cos(t), -0.26 * std::sin(1.3 * t), 0.35 * std::cos(0.7 * t));
  };
  auto accels = [](double t) {
    return Vec3(-0.3 * std::sin(t), -0.338 * std::cos(1.3 * t), -0.245 * std::sin(0.7 * t));
  };
  const double h = 1e-5;
  for (double t : {0.0, 0.4, 1.7, 3.2}) {
    const EulerKinematics k = euler_kinematics(angles(t), rates(t), accels(t));
    const Mat3 Rdot = (rotation_from_euler(angles(t + h)) - rotation_from_euler(angles(t - h))) / (2 * h);
    const Mat3 W = k.R.transpose() * Rdot;
    EXPECT_LT((Vec3(W(2, 1), W(0, 2), W(1, 0)) - k.omega).norm(), 1e-8);
    const Vec3 w_plus = euler_kinematics(angles(t + h), rates(t + h), accels(t + h)).omega;
    const Vec3 w_minus = euler_kinematics(angles(t - h), rates(t - h), accels(t - h)).omega;
    EXPECT_LT(((w_plus - w_minus) / (2 * h) - k.alpha).norm(), 1e-7);
  }
}

TEST(EulerKinematics, GimbalProximityRaises) {
  try {
    euler_kinematics(Vec3(0.0, 1.5703, 0.0), Vec3::Zero(), Vec3::Zero());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::gimbal_proximity);
  }
}

std::vector<KinematicSample> random_samples(std::mt19937_64& rng, int n) {
  std::vector<KinematicSample> kin(n);
  for (auto& k : kin) {
    k.R = testing::random_quat(rng).toRotationMatrix();
    k.velocity = random_vec3(rng, 0.5);
    k.acceleration = random_vec3(rng, 1.0);
    k.omega = random_vec3(rng, 1.0);
    k.alpha = random_vec3(rng, 1.0);
  }
  return kin;
}

TEST(StackRegressor, FullRankForRichMotionAndExactForConsistentData) {
  std::mt19937_64 rng(4);
  const InertialParams p = random_params(rng);
  const auto kin = random_samples(rng, 50);
  std::vector<Wrench> w(kin.size());
  for (std::size_t i = 0; i < kin.size(); ++i) w[i] = Wrench::from_vector(regressor_row(kin[i]) * p.to_vector());
  const StackedSystem sys = stack_regressor(kin, w, Execution::serial);
  EXPECT_EQ(sys.W.rows(), 300);
  EXPECT_TRUE(sys.full_rank());
  EXPECT_LT((sys.W * p.to_vector() - sys.b).norm(), 1e-12);
}

TEST(StackRegressor, RotationFreeMotionIsRankDeficient) {
  std::mt19937_64 rng(5);
  auto kin = random_samples(rng, 40);
  for (auto& k : kin) {
    k.R.setIdentity();
    k.omega.setZero();
    k.alpha.setZero();
  }
  const StackedSystem sys = stack_regressor(kin, std::vector<Wrench>(kin.size()), Execution::serial);
  EXPECT_LT(sys.rank, 10);
}

TEST(StackRegressor, SerialAndParallelAgreeBitwise) {
  std::mt19937_64 rng(6);
  const auto kin = random_samples(rng, 400);
  std::vector<Wrench> w(kin.size());
  for (auto& x : w) x = {random_vec3(rng, 1.0), random_vec3(rng, 1.0)};
  const StackedSystem a = stack_regressor(kin, w, Execution::serial);
  const StackedSystem b = stack_regressor(kin, w, Execution::parallel);
  EXPECT_EQ(a.W, b.W);
  EXPECT_EQ(a.b, b.b);
  EXPECT_EQ(a.rank, b.rank);
}

TEST(StackRegressor, MismatchedLengthsRaise) {
  std::mt19937_64 rng(7);
  const auto kin = random_samples(rng, 3);
  EXPECT_THROW(stack_regressor(kin, std::vector<Wrench>(2)), Error);
}

}  // namespace
}  // namespace ffid
