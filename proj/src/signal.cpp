#include "ffid/signal.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <sstream>

namespace ffid {

namespace {

// The FFTW planner is not thread-safe; execution is. FFTW_ESTIMATE keeps the
// chosen algorithm independent of timing, so results are reproducible.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard<std::mutex> lock(planner_mutex());
    forward_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_1d(n, out_, in_, FFTW_ESTIMATE);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  ~RealFft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
    fftw_free(in_);
    fftw_free(out_);
  }

  int bins() const { return n_ / 2 + 1; }

  std::vector<std::complex<double>> forward(const Eigen::VectorXd& x) {
    for (int i = 0; i < n_; ++i) in_[i] = x(i);
    fftw_execute(forward_);
    std::vector<std::complex<double>> X(bins());
    for (int k = 0; k < bins(); ++k) X[k] = {out_[k][0], out_[k][1]};
    return X;
  }

  /// Unnormalised inverse; divides by N before returning.
  Eigen::VectorXd backward(const std::vector<std::complex<double>>& X) {
    for (int k = 0; k < bins(); ++k) {
      out_[k][0] = X[k].real();
      out_[k][1] = X[k].imag();
    }
    fftw_execute(backward_);
    Eigen::VectorXd x(n_);
    for (int i = 0; i < n_; ++i) x(i) = in_[i] / n_;
    return x;
  }

 private:
  int n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan forward_;
  fftw_plan backward_;
};

void check_harmonics(int n, int size) {
  if (n < 0 || n >= size / 2.0) {
    std::ostringstream os;
    os << "harmonic count " << n << " must be below half the period length " << size;
    throw Error(ErrorKind::invalid_input, os.str());
  }
}

}  // namespace

double PeriodicSignal::omega_f() const { return 2.0 * std::numbers::pi / period(); }

void unwrap_columns(Eigen::MatrixXd& m, int first, int count) {
  for (int c = first; c < first + count; ++c) {
    double offset = 0.0;
    for (Eigen::Index r = 1; r < m.rows(); ++r) {
      const double raw_prev = m(r - 1, c) - offset;
      const double d = m(r, c) - raw_prev;
      if (d > std::numbers::pi) offset -= 2.0 * std::numbers::pi;
      else if (d < -std::numbers::pi) offset += 2.0 * std::numbers::pi;
      m(r, c) += offset;
    }
  }
}

PeriodicSignal cycle_average(const Eigen::MatrixXd& samples, int cycles, int samples_per_period,
                             double sample_rate) {
  if (cycles < 1 || samples_per_period < 1 || samples.rows() != static_cast<Eigen::Index>(cycles) * samples_per_period) {
    std::ostringstream os;
    os << "expected " << cycles << " × " << samples_per_period << " samples, got " << samples.rows();
    throw Error(ErrorKind::invalid_log, os.str());
  }
  PeriodicSignal sig;
  sig.sample_rate = sample_rate;
  sig.samples = Eigen::MatrixXd::Zero(samples_per_period, samples.cols());
  for (int c = 0; c < cycles; ++c) sig.samples += samples.middleRows(static_cast<Eigen::Index>(c) * samples_per_period, samples_per_period);
  sig.samples /= cycles;
  return sig;
}

PeriodicSignal cycle_average(const MeasurementLog& log, int cycles) {
  Eigen::MatrixXd pose = log.pose;
  unwrap_columns(pose, 3, 3);
  return cycle_average(pose, cycles, log.meta.samples_per_period(), log.meta.sample_rate);
}

PeriodicSignal cycle_average_inputs(const MeasurementLog& log, int cycles) {
  return cycle_average(log.u, cycles, log.meta.samples_per_period(), log.meta.sample_rate);
}

PeriodicSignal fft_filter(const PeriodicSignal& sig, int n) {
  const int N = sig.size();
  check_harmonics(n, N);
  if (n >= N / 2.0 - 1.0) return sig;
  PeriodicSignal out = sig;
  RealFft fft(N);
  for (int c = 0; c < sig.channels(); ++c) {
    auto X = fft.forward(sig.samples.col(c));
    for (int k = n + 1; k < fft.bins(); ++k) X[k] = 0.0;
    out.samples.col(c) = fft.backward(X);
  }
  return out;
}

ChannelSpectrum channel_spectrum(const Eigen::VectorXd& x, int n) {
  const int N = static_cast<int>(x.size());
  check_harmonics(n, N);
  RealFft fft(N);
  const auto X = fft.forward(x);
  ChannelSpectrum s;
  s.c0 = X[0].real() / N;
  s.A.resize(n);
  s.B.resize(n);
  for (int k = 1; k <= n; ++k) {
    // A Nyquist bin has no sine partner and is not doubled.
    const double scale = (2 * k == N) ? 1.0 : 2.0;
    s.A(k - 1) = scale * X[k].real() / N;
    s.B(k - 1) = -scale * X[k].imag() / N;
  }
  return s;
}

FourierTrajectory fit_fourier(const PeriodicSignal& sig, int n) {
  if (sig.channels() != 6) throw Error(ErrorKind::invalid_input, "Fourier fit expects the 6 pose channels");
  const double w = sig.omega_f();
  FourierTrajectory fit = FourierTrajectory::zero(w, n);
  for (int c = 0; c < 6; ++c) {
    const ChannelSpectrum s = channel_spectrum(sig.samples.col(c), n);
    fit.axes[c].a0 = s.c0;
    for (int k = 1; k <= n; ++k) {
      // A cos + B sin = (a/(ωk)) sin − (b/(ωk)) cos
      fit.axes[c].a(k - 1) = s.B(k - 1) * w * k;
      fit.axes[c].b(k - 1) = -s.A(k - 1) * w * k;
    }
  }
  return fit;
}

double spectral_energy_above(const PeriodicSignal& sig, int n) {
  const int N = sig.size();
  RealFft fft(N);
  double e = 0.0;
  for (int c = 0; c < sig.channels(); ++c) {
    const auto X = fft.forward(sig.samples.col(c));
    for (int k = n + 1; k < fft.bins(); ++k) e += std::norm(X[k]) / (static_cast<double>(N) * N);
  }
  return e;
}

std::vector<TrajectorySample> reconstruct_trajectory(const FourierTrajectory& fit, int samples,
                                                     double sample_rate) {
  std::vector<TrajectorySample> out(samples);
  for (int j = 0; j < samples; ++j) out[j] = eval(fit, j / sample_rate);
  return out;
}

std::vector<KinematicSample> reconstruct_kinematics(const FourierTrajectory& fit, int samples,
                                                    double sample_rate) {
  std::vector<KinematicSample> out(samples);
  for (int j = 0; j < samples; ++j) {
    const TrajectorySample s = eval(fit, j / sample_rate);
    out[j] = kinematic_sample(s.X, s.Xdot, s.Xddot);
  }
  return out;
}

}  // namespace ffid
