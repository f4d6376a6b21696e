#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ffid {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec10 = Eigen::Matrix<double, 10, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Quat = Eigen::Quaterniond;

/// Failure categories. Each maps onto a CLI exit code via exit_code().
enum class ErrorKind {
  config,
  invalid_input,
  invalid_log,
  invalid_window,
  singular_inertia,
  inconsistent_parameters,
  gimbal_proximity,
  rank_deficiency,
  infeasible_config,
  selection_failure,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// 2 for malformed inputs and configuration, 3 for numerical failures.
int exit_code(ErrorKind kind);

/// Selects the serial reference path or the OpenMP path of a kernel.
/// Both paths produce bitwise-identical results.
enum class Execution { serial, parallel };

}  // namespace ffid
