#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ffid/control.hpp"
#include "ffid/signal.hpp"
#include "test_support.hpp"

namespace ffid {
namespace {

InertialParams truth() { return attach_load(default_robot(), 1.2, Vec3(0.15, -0.10, 0.12)); }

TEST(AttitudeError, Examples) {
  std::mt19937_64 rng(1);
  const Quat q = testing::random_quat(rng);
  EXPECT_LT(attitude_error(q, q).norm(), 1e-15);
  const double theta = 0.01;
  const Quat qz(Eigen::AngleAxisd(theta, Vec3::UnitZ()));
  EXPECT_LT((attitude_error(Quat::Identity(), qz) - Vec3(0.0, 0.0, std::sin(theta))).norm(), 1e-15);
  for (int i = 0; i < 20; ++i) {
    const Quat a = testing::random_quat(rng), b = testing::random_quat(rng);
    EXPECT_LT((attitude_error(a, b) + attitude_error(b, a)).norm(), 1e-14);
  }
}

TEST(ControllerConfig, Validation) {
  ControllerConfig c;
  c.nominal = truth();
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.horizon_steps(), 50);
  c.blocks = {10, 10};
  EXPECT_THROW(c.validate(), Error);
  c = ControllerConfig{};
  c.nominal = truth();
  c.period = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = ControllerConfig{};
  c.nominal = truth();
  c.P(0) = -1.0;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_EQ(controller_type_from_string("pd"), ControllerType::computed_wrench);
  EXPECT_THROW(controller_type_from_string("lqr"), Error);
}

TEST(RecedingHorizon, RestIsAFixedPoint) {
  ControllerConfig c;
  c.nominal = truth();
  RecedingHorizonController mpc(c, ActuationMatrix::illustrative());
  const FourierTrajectory rest = FourierTrajectory::zero(2 * 3.14159265358979 / 10.0, 3);
  const ActuatorCommand u = mpc.command(RigidBodyState{}, reference_window(rest, 0.0, c.period, 50));
  EXPECT_LT(u.u.norm(), 1e-6);
  EXPECT_FALSE(u.saturated);
}

TEST(RecedingHorizon, ShortWindowRaises) {
  ControllerConfig c;
  c.nominal = truth();
  RecedingHorizonController mpc(c, ActuationMatrix::illustrative());
  const FourierTrajectory rest = FourierTrajectory::zero(0.6, 3);
  try {
    mpc.command(RigidBodyState{}, reference_window(rest, 0.0, c.period, 10));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_window);
  }
}

TEST(RecedingHorizon, CommandsStayWithinBounds) {
  ControllerConfig c;
  c.nominal = default_robot();
  c.bounds = ActuatorBounds::symmetric(0.3);
  RecedingHorizonController mpc(c, ActuationMatrix::illustrative());
  const FourierTrajectory traj = testing::reference_trajectory();
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    RigidBodyState s = testing::random_state(rng);
    s.position *= 0.3;
    const ActuatorCommand u = mpc.command(s, reference_window(traj, 0.1 * i, c.period, 50));
    EXPECT_LE(u.u.cwiseAbs().maxCoeff(), 0.3);
  }
}

struct TrackingStats {
  Vec6 rms_over_amplitude = Vec6::Zero();
  double high_band_fraction = 0.0;
};

TrackingStats tracking_stats(const MeasurementLog& log, const FourierTrajectory& traj, int cycle) {
  const int N = log.meta.samples_per_period();
  Vec6 sq = Vec6::Zero(), amp = Vec6::Zero();
  for (int j = cycle * N; j < (cycle + 1) * N; ++j) {
    const Vec6 ref = eval(traj, log.t[j]).X;
    sq += (log.pose.row(j).transpose() - ref).cwiseAbs2();
    amp = amp.cwiseMax(ref.cwiseAbs());
  }
  TrackingStats s;
  s.rms_over_amplitude = (sq / N).cwiseSqrt().cwiseQuotient(amp);
  PeriodicSignal one;
  one.sample_rate = log.meta.sample_rate;
  one.samples = log.pose.middleRows(static_cast<Eigen::Index>(cycle) * N, N);
  const double total = spectral_energy_above(one, -1);
  s.high_band_fraction = spectral_energy_above(one, traj.harmonics) / total;
  return s;
}

TEST(ClosedLoop, AccurateTrackingWithTrueParameters) {
  ControllerConfig c;
  c.nominal = truth();
  c.bounds = ActuatorBounds::unbounded();
  SimulationConfig sim;
  sim.cycles = 2;
  const FourierTrajectory traj = testing::reference_trajectory();
  const MeasurementLog log = simulate_closed_loop(c, ActuationMatrix::illustrative(), truth(), traj, sim);
  EXPECT_EQ(log.size(), 2000u);
  EXPECT_EQ(log.meta.saturation_fraction, 0.0);
  const TrackingStats first = tracking_stats(log, traj, 0);
  const TrackingStats second = tracking_stats(log, traj, 1);
  EXPECT_LT(first.rms_over_amplitude.maxCoeff(), 0.01);
  EXPECT_LT(second.high_band_fraction, 1e-6);
  // Non-increasing error in the periodic regime.
  EXPECT_LE(second.rms_over_amplitude.norm(), first.rms_over_amplitude.norm() * (1.0 + 1e-6));
}

TEST(ClosedLoop, StaleParametersAddHarmonics) {
  ControllerConfig c;
  c.nominal = default_robot();
  c.bounds = ActuatorBounds::unbounded();
  SimulationConfig sim;
  sim.cycles = 1;
  const FourierTrajectory traj = testing::reference_trajectory();
  const MeasurementLog log = simulate_closed_loop(c, ActuationMatrix::illustrative(), truth(), traj, sim);
  c.nominal = truth();
  const MeasurementLog ref = simulate_closed_loop(c, ActuationMatrix::illustrative(), truth(), traj, sim);
  const double stale = tracking_stats(log, traj, 0).high_band_fraction;
  const double exact = tracking_stats(ref, traj, 0).high_band_fraction;
  EXPECT_GT(stale, 0.0);
  EXPECT_GT(stale, exact);
}

TEST(ClosedLoop, TightBoundsSaturate) {
  ControllerConfig c;
  c.nominal = default_robot();
  c.bounds = ActuatorBounds::symmetric(0.05);
  c.type = ControllerType::computed_wrench;
  SimulationConfig sim;
  sim.cycles = 1;
  const FourierTrajectory traj = testing::reference_trajectory();
  const MeasurementLog log = simulate_closed_loop(c, ActuationMatrix::illustrative(), truth(), traj, sim);
  EXPECT_GT(log.meta.saturation_fraction, 0.0);
  EXPECT_LE(log.u.cwiseAbs().maxCoeff(), 0.05 + 1e-15);
  EXPECT_EQ(log.meta.control_steps, 500);
}

TEST(ClosedLoop, ComputedWrenchControllerTracks) {
  ControllerConfig c;
  c.type = ControllerType::computed_wrench;
  c.nominal = truth();
  c.bounds = ActuatorBounds::unbounded();
  c.period = 0.01;
  SimulationConfig sim;
  sim.cycles = 1;
  const FourierTrajectory traj = testing::reference_trajectory();
  const MeasurementLog log = simulate_closed_loop(c, ActuationMatrix::illustrative(), truth(), traj, sim);
  EXPECT_LT(tracking_stats(log, traj, 0).rms_over_amplitude.maxCoeff(), 0.01);
}

TEST(ClosedLoop, NoiseIsDeterministicAndHasTheRequestedSpread) {
  MeasurementLog clean;
  clean.meta.period = 10.0;
  clean.meta.cycles = 10;
  clean.t.assign(10000, 0.0);
  clean.pose = Eigen::MatrixXd::Zero(10000, 6);
  clean.u = Eigen::MatrixXd::Zero(10000, 6);
  clean.saturated.assign(10000, 0);
  const NoiseModel noise;
  const MeasurementLog a = add_measurement_noise(clean, noise, 5);
  const MeasurementLog b = add_measurement_noise(clean, noise, 5);
  const MeasurementLog c = add_measurement_noise(clean, noise, 6);
  EXPECT_EQ(a.pose, b.pose);
  EXPECT_NE(a.pose, c.pose);
  const double sd_pos = std::sqrt(a.pose.col(0).squaredNorm() / 10000.0);
  const double sd_ang = std::sqrt(a.pose.col(4).squaredNorm() / 10000.0);
  EXPECT_NEAR(sd_pos, noise.position_sigma, 0.05 * noise.position_sigma);
  EXPECT_NEAR(sd_ang, noise.angle_sigma, 0.05 * noise.angle_sigma);
  EXPECT_EQ(add_measurement_noise(clean, NoiseModel::none(), 5).pose, clean.pose);
}

TEST(ClosedLoop, SimulationConfigChecks) {
  SimulationConfig sim;
  EXPECT_NO_THROW(sim.validate(10.0, 0.02));
  sim.sample_rate = 300.0;  // 1/300 s is not a multiple of 1 ms
  EXPECT_THROW(sim.validate(10.0, 0.02), Error);
  sim = SimulationConfig{};
  sim.cycles = 0;
  EXPECT_THROW(sim.validate(10.0, 0.02), Error);
}

}  // namespace
}  // namespace ffid
