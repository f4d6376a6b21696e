#pragma once

/**
 * @file signal.hpp
 * @brief Periodic signal conditioning: cycle averaging, harmonic band
 *        filtering and truncated Fourier fitting via the FFT.
 */

#include <vector>

#include "ffid/common.hpp"
#include "ffid/measurement_log.hpp"
#include "ffid/regressor.hpp"
#include "ffid/trajectory.hpp"

namespace ffid {

/// One period of a multi-channel signal sampled uniformly from t = 0.
struct PeriodicSignal {
  Eigen::MatrixXd samples;  ///< N_s × channels
  double sample_rate = 100.0;

  int size() const { return static_cast<int>(samples.rows()); }
  int channels() const { return static_cast<int>(samples.cols()); }
  double period() const { return size() / sample_rate; }
  double omega_f() const;
  double time(int j) const { return j / sample_rate; }
};

/// Unwraps the columns [first, first + count) in place (jumps > π removed).
void unwrap_columns(Eigen::MatrixXd& m, int first, int count);

/// Element-wise mean over cycles for each phase bin.
/// Throws invalid_log unless rows == cycles × samples_per_period.
PeriodicSignal cycle_average(const Eigen::MatrixXd& samples, int cycles, int samples_per_period,
                             double sample_rate);

/// Pose channels of the log (Euler angles unwrapped first).
PeriodicSignal cycle_average(const MeasurementLog& log, int cycles);
/// Command channels of the log.
PeriodicSignal cycle_average_inputs(const MeasurementLog& log, int cycles);

/// Keeps DC and harmonics 1..n of the fundamental, zeroes all other bins.
/// n ≥ N_s/2 − 1 is all-pass. Throws invalid_input when n ≥ N_s/2.
PeriodicSignal fft_filter(const PeriodicSignal& sig, int n);

/// Least-squares truncated Fourier series of a 6-channel signal, in the
/// velocity-level parameterisation of FourierTrajectory.
FourierTrajectory fit_fourier(const PeriodicSignal& sig, int n);

/// Position-level Fourier coefficients of one channel: x ≈ c0 + Σ A_k cos + B_k sin.
struct ChannelSpectrum {
  double c0 = 0.0;
  Eigen::VectorXd A, B;
};
ChannelSpectrum channel_spectrum(const Eigen::VectorXd& x, int n);

/// Spectral energy Σ_k>n |X_k|² (one-sided, normalised by N²) summed over channels.
double spectral_energy_above(const PeriodicSignal& sig, int n);

/// Analytic X̂, X̂dot, X̂ddot at the sample instants of one period.
std::vector<TrajectorySample> reconstruct_trajectory(const FourierTrajectory& fit, int samples,
                                                     double sample_rate);

/// Same, converted to rotation, body rates and inertial accelerations.
/// Propagates gimbal_proximity.
std::vector<KinematicSample> reconstruct_kinematics(const FourierTrajectory& fit, int samples,
                                                    double sample_rate);

}  // namespace ffid
