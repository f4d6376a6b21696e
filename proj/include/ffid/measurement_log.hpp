#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ffid/common.hpp"

namespace ffid {

/// How the logged inputs relate to the sample instants.
///  - zoh: row k holds the command applied over [t_k, t_k + 1/f_s).
///  - instantaneous: row k holds the input at exactly t_k.
enum class InputConvention { zoh, instantaneous };

const char* to_string(InputConvention c);
InputConvention input_convention_from_string(const std::string& s);

struct LogMetadata {
  double period = 10.0;        ///< T_f, s
  int cycles = 1;              ///< C
  double sample_rate = 100.0;  ///< f_s, Hz
  double control_period = 0.02;
  InputConvention convention = InputConvention::zoh;
  std::uint64_t seed = 0;
  std::uint64_t noise_seed = 0;
  double position_sigma = 0.0;  ///< m
  double angle_sigma = 0.0;     ///< rad
  double saturation_fraction = 0.0;
  int control_steps = 0;
  int saturated_steps = 0;
  std::string controller;

  /// Samples per period, N_s = T_f f_s. Throws invalid_log unless integral.
  int samples_per_period() const;
};

/// Measured poses (x, y, z, φ, θ, ψ) and commands u at the sample instants.
struct MeasurementLog {
  std::vector<double> t;
  Eigen::MatrixXd pose;  ///< rows × 6
  Eigen::MatrixXd u;     ///< rows × 6
  std::vector<int> saturated;
  LogMetadata meta;

  std::size_t size() const { return t.size(); }
  /// Checks shapes against the metadata (C N_s rows). Throws invalid_log.
  void validate() const;
};

}  // namespace ffid
