#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>

#include "ffid/control.hpp"
#include "ffid/signal.hpp"
#include "test_support.hpp"

namespace ffid {
namespace {

constexpr double kPi = std::numbers::pi;

PeriodicSignal sampled(int N, double fs, const std::function<double(double, int)>& f, int channels = 1) {
  PeriodicSignal s;
  s.sample_rate = fs;
  s.samples.resize(N, channels);
  for (int j = 0; j < N; ++j) {
    for (int c = 0; c < channels; ++c) s.samples(j, c) = f(j / fs, c);
  }
  return s;
}

// Naive O(N²) DFT energy above harmonic n, independent of the FFT backend.
double dft_energy_above(const Eigen::VectorXd& x, int n) {
  const int N = static_cast<int>(x.size());
  double e = 0.0;
  for (int k = n + 1; k <= N / 2; ++k) {
    std::complex<double> X = 0.0;
    for (int j = 0; j < N; ++j) X += x(j) * std::polar(1.0, -2.0 * kPi * k * j / N);
    e += std::norm(X) / (static_cast<double>(N) * N);
  }
  return e;
}

TEST(CycleAverage, SingleCycleIsIdentity) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Random(50, 3);
  const PeriodicSignal s = cycle_average(m, 1, 50, 10.0);
  EXPECT_EQ(s.samples, m);
  EXPECT_THROW(cycle_average(m, 2, 30, 10.0), Error);
}

TEST(CycleAverage, NoiseVarianceDropsWithCycles) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise(0.0, 0.1);
  const int N = 200, C = 10, runs = 100;
  double var = 0.0;
  for (int r = 0; r < runs; ++r) {
    Eigen::MatrixXd m(C * N, 1);
    for (int i = 0; i < C * N; ++i) m(i, 0) = std::sin(2 * kPi * (i % N) / N) + noise(rng);
    const PeriodicSignal s = cycle_average(m, C, N, 100.0);
    for (int j = 0; j < N; ++j) var += std::pow(s.samples(j, 0) - std::sin(2 * kPi * j / N), 2);
  }
  var /= runs * N;
  EXPECT_NEAR(var, 0.01 / C, 0.2 * 0.01 / C);
}

TEST(CycleAverage, TenCyclesOfOneThousandSamples) {
  MeasurementLog log;
  log.meta.period = 10.0;
  log.meta.cycles = 10;
  log.meta.sample_rate = 100.0;
  log.t.resize(10000);
  log.pose = Eigen::MatrixXd::Zero(10000, 6);
  log.u = Eigen::MatrixXd::Zero(10000, 6);
  log.saturated.assign(10000, 0);
  EXPECT_EQ(cycle_average(log, 10).size(), 1000);
}

TEST(CycleAverage, UnwrapsAngles) {
  Eigen::MatrixXd m(6, 1);
  m << 3.0, 3.1, -3.1, -3.0, 3.1, 3.0;
  unwrap_columns(m, 0, 1);
  EXPECT_NEAR(m(2, 0), 2 * kPi - 3.1, 1e-15);
  EXPECT_NEAR(m(3, 0), 2 * kPi - 3.0, 1e-15);
  EXPECT_NEAR(m(4, 0), 3.1, 1e-15);
}

TEST(FftFilter, RemovesHighHarmonic) {
  const int N = 1000;
  const double fs = 100.0, w = 2 * kPi / 10.0;
  const PeriodicSignal s = sampled(N, fs, [&](double t, int) { return std::sin(w * t) + std::sin(20 * w * t); });
  const PeriodicSignal f = fft_filter(s, 3);
  double rms = 0.0;
  for (int j = 0; j < N; ++j) rms += std::pow(f.samples(j, 0) - std::sin(w * j / fs), 2);
  EXPECT_LT(std::sqrt(rms / N), 1e-10);
}

TEST(FftFilter, AllPassAndConstant) {
  const PeriodicSignal s = sampled(64, 8.0, [](double t, int) { return std::cos(37.0 * t) + 0.3; });
  EXPECT_EQ(fft_filter(s, 31).samples, s.samples);
  const PeriodicSignal c = sampled(64, 8.0, [](double, int) { return 2.5; });
  const PeriodicSignal fc = fft_filter(c, 2);
  EXPECT_LT((fc.samples.array() - 2.5).abs().maxCoeff(), 1e-14);
  EXPECT_THROW(fft_filter(s, 32), Error);
  EXPECT_THROW(fft_filter(s, -1), Error);
}

TEST(FftFilter, IdempotentProjection) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const PeriodicSignal s = sampled(257, 10.0, [&](double, int) { return n(rng); }, 2);
    const PeriodicSignal once = fft_filter(s, 5);
    const PeriodicSignal twice = fft_filter(once, 5);
    EXPECT_LT((once.samples - twice.samples).cwiseAbs().maxCoeff(), 1e-14);
    for (int c = 0; c < 2; ++c) {
      EXPECT_LT(dft_energy_above(once.samples.col(c), 5), 1e-28);
      EXPECT_NEAR(spectral_energy_above(s, 5), dft_energy_above(s.samples.col(0), 5) +
                                                    dft_energy_above(s.samples.col(1), 5),
                  1e-10);
    }
  }
}

TEST(FftFilter, CommutesWithCycleAverage) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  const int N = 100, C = 4;
  Eigen::MatrixXd m(C * N, 1);
  for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, 0) = n(rng);
  const PeriodicSignal avg_then_filter = fft_filter(cycle_average(m, C, N, 10.0), 4);
  Eigen::MatrixXd filtered(C * N, 1);
  for (int c = 0; c < C; ++c) {
    PeriodicSignal one;
    one.sample_rate = 10.0;
    one.samples = m.middleRows(c * N, N);
    filtered.middleRows(c * N, N) = fft_filter(one, 4).samples;
  }
  const PeriodicSignal filter_then_avg = cycle_average(filtered, C, N, 10.0);
  EXPECT_LT((avg_then_filter.samples - filter_then_avg.samples).cwiseAbs().maxCoeff(), 1e-10);
}

PeriodicSignal pose_signal(const FourierTrajectory& traj, int N, double fs) {
  PeriodicSignal s;
  s.sample_rate = fs;
  s.samples.resize(N, 6);
  for (int j = 0; j < N; ++j) s.samples.row(j) = eval(traj, j / fs).X.transpose();
  return s;
}

TEST(FitFourier, ExactRecovery) {
  const FourierTrajectory traj = testing::reference_trajectory();
  const FourierTrajectory fit = fit_fourier(pose_signal(traj, 1000, 100.0), 3);
  EXPECT_LT((fit.coefficients() - traj.coefficients()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(fit.omega_f, traj.omega_f, 1e-12);
  const FourierTrajectory zero = fit_fourier(sampled(200, 20.0, [](double, int) { return 0.0; }, 6), 3);
  EXPECT_EQ(zero.coefficients(), Eigen::VectorXd::Zero(42));
}

TEST(FitFourier, NoiseLevelMatchesLeastSquaresVariance) {
  const int N = 1000;
  const double sigma = 1e-3;
  const FourierTrajectory traj = testing::reference_trajectory();
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, sigma);
  PeriodicSignal s = pose_signal(traj, N, 100.0);
  s.samples += Eigen::MatrixXd::NullaryExpr(N, 6, [&]() { return n(rng); });
  double sq = 0.0;
  int count = 0;
  for (int c = 0; c < 6; ++c) {
    const ChannelSpectrum a = channel_spectrum(pose_signal(traj, N, 100.0).samples.col(c), 3);
    const ChannelSpectrum b = channel_spectrum(s.samples.col(c), 3);
    sq += (a.A - b.A).squaredNorm() + (a.B - b.B).squaredNorm();
    count += 6;
  }
  EXPECT_LT(std::sqrt(sq / count), 3.0 * sigma * std::sqrt(2.0 / N));
}

TEST(Reconstruct, ZeroAndSingleHarmonic) {
  const auto zero = reconstruct_kinematics(FourierTrajectory::zero(0.5, 2), 10, 1.0);
  for (const auto& k : zero) {
    EXPECT_EQ(k.velocity, Vec3::Zero());
    EXPECT_EQ(k.omega, Vec3::Zero());
    EXPECT_EQ(k.alpha, Vec3::Zero());
  }
  FourierTrajectory one = FourierTrajectory::zero(0.5, 1);
  one.axes[2].b(0) = 0.2;  // z = -(0.2/0.5) cos(0.5 t) + const
  const auto s = reconstruct_trajectory(one, 20, 2.0);
  for (int j = 0; j < 20; ++j) {
    const double t = j / 2.0;
    EXPECT_NEAR(s[j].Xddot(2), 0.2 * 0.5 * std::cos(0.5 * t), 1e-14);
  }
}

// Accelerations from the fitted series against a second difference of the
// tracked positions of a noiseless closed-loop run.
TEST(Reconstruct, AccelerationMatchesFiniteDifferenceOfTrackedRun) {
  const InertialParams truth = attach_load(default_robot(), 1.2, Vec3(0.15, -0.10, 0.12));
  ControllerConfig cc;
  cc.nominal = truth;
  cc.bounds = ActuatorBounds::unbounded();
  SimulationConfig sim;
  sim.cycles = 1;
  const FourierTrajectory traj = testing::reference_trajectory();
  const MeasurementLog log = simulate_closed_loop(cc, ActuationMatrix::illustrative(), truth, traj, sim);
  const PeriodicSignal pose = cycle_average(log, 1);
  const auto kin = reconstruct_kinematics(fit_fourier(fft_filter(pose, 3), 3), pose.size(), pose.sample_rate);
  const double h = 1.0 / pose.sample_rate;
  double sq = 0.0;
  int count = 0;
  for (int j = 1; j + 1 < pose.size(); ++j) {
    const Vec3 fd = (pose.samples.row(j + 1).head<3>() - 2.0 * pose.samples.row(j).head<3>() +
                     pose.samples.row(j - 1).head<3>()).transpose() / (h * h);
    sq += (fd - kin[j].acceleration).squaredNorm();
    count += 3;
  }
  EXPECT_LT(std::sqrt(sq / count), 1e-3);
}

}  // namespace
}  // namespace ffid
