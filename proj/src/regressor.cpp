#include "ffid/regressor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ffid {

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return s;
}

Eigen::Matrix<double, 3, 6> star_omega(const Vec3& w) {
  Eigen::Matrix<double, 3, 6> m;
  m << w.x(), w.y(), w.z(), 0.0,   0.0,   0.0,
       0.0,   w.x(), 0.0,   w.y(), w.z(), 0.0,
       0.0,   0.0,   w.x(), 0.0,   w.y(), w.z();
  return m;
}

RegressorRow regressor_row(const Mat3& R, const Vec3& omega, const Vec3& alpha, const Vec3& a_c) {
  const Vec3 a_body = R.transpose() * a_c;
  const Mat3 Sw = skew(omega);

  RegressorRow g = RegressorRow::Zero();
  g.block<3, 1>(0, 0) = a_body;
  g.block<3, 3>(0, 1) = skew(alpha) + Sw * Sw;
  g.block<3, 3>(3, 1) = -skew(a_body);
  g.block<3, 6>(3, 4) = star_omega(alpha) + Sw * star_omega(omega);
  return g;
}

RegressorRow regressor_row(const KinematicSample& k) {
  return regressor_row(k.R, k.omega, k.alpha, k.acceleration);
}

Mat3 rotation_from_euler(const Vec3& angles) {
  const double cf = std::cos(angles(0)), sf = std::sin(angles(0));
  const double ct = std::cos(angles(1)), st = std::sin(angles(1));
  const double cp = std::cos(angles(2)), sp = std::sin(angles(2));
  Mat3 R;
  R << cp * ct, cp * st * sf - sp * cf, cp * st * cf + sp * sf,
       sp * ct, sp * st * sf + cp * cf, sp * st * cf - cp * sf,
       -st,     ct * sf,                ct * cf;
  return R;
}

Vec3 euler_from_rotation(const Mat3& R) {
  const double s = std::clamp(-R(2, 0), -1.0, 1.0);
  return {std::atan2(R(2, 1), R(2, 2)), std::asin(s), std::atan2(R(1, 0), R(0, 0))};
}

EulerKinematics euler_kinematics(const Vec3& angles, const Vec3& rates, const Vec3& accels) {
  const double phi = angles(0), theta = angles(1);
  const double cf = std::cos(phi), sf = std::sin(phi);
  const double ct = std::cos(theta), st = std::sin(theta);
  if (std::abs(ct) < 1e-3) {
    std::ostringstream os;
    os << "pitch angle " << theta << " rad is too close to ±π/2";
    throw Error(ErrorKind::gimbal_proximity, os.str());
  }
  const double dphi = rates(0), dtheta = rates(1);

  // ω = T(φ, θ) (φ̇, θ̇, ψ̇)
  Mat3 T;
  T << 1.0, 0.0, -st,
       0.0, cf,  sf * ct,
       0.0, -sf, cf * ct;
  Mat3 Tdot;
  Tdot << 0.0, 0.0,         -ct * dtheta,
          0.0, -sf * dphi,  cf * ct * dphi - sf * st * dtheta,
          0.0, -cf * dphi, -sf * ct * dphi - cf * st * dtheta;

  EulerKinematics k;
  k.R = rotation_from_euler(angles);
  k.omega = T * rates;
  k.alpha = Tdot * rates + T * accels;
  return k;
}

KinematicSample kinematic_sample(const Vec6& X, const Vec6& Xdot, const Vec6& Xddot) {
  const EulerKinematics e = euler_kinematics(X.tail<3>(), Xdot.tail<3>(), Xddot.tail<3>());
  KinematicSample k;
  k.R = e.R;
  k.omega = e.omega;
  k.alpha = e.alpha;
  k.velocity = Xdot.head<3>();
  k.acceleration = Xddot.head<3>();
  return k;
}

void update_rank(StackedSystem& sys) {
  if (sys.W.rows() == 0) {
    sys.rank = 0;
    sys.singular_values = Eigen::VectorXd::Zero(10);
    return;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.W);
  sys.singular_values = svd.singularValues();
  const double smax = sys.singular_values.size() > 0 ? sys.singular_values(0) : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sys.singular_values.size(); ++i) {
    if (smax > 0.0 && sys.singular_values(i) > kRankTolerance * smax) ++rank;
  }
  sys.rank = rank;
}

StackedSystem assemble(std::span<const RegressorRow> rows, std::span<const Wrench> wrenches) {
  if (rows.size() != wrenches.size()) {
    throw Error(ErrorKind::invalid_input, "regressor and wrench sample counts differ");
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  StackedSystem sys;
  sys.samples = static_cast<int>(n);
  sys.W.resize(6 * n, 10);
  sys.b.resize(6 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sys.W.block<6, 10>(6 * i, 0) = rows[i];
    sys.b.segment<6>(6 * i) = wrenches[i].to_vector();
  }
  update_rank(sys);
  return sys;
}

StackedSystem stack_regressor(std::span<const KinematicSample> kin, std::span<const Wrench> wrenches,
                              Execution exec) {
  if (kin.size() != wrenches.size()) {
    throw Error(ErrorKind::invalid_input, "kinematic and wrench sample counts differ");
  }
  const auto n = static_cast<Eigen::Index>(kin.size());
  StackedSystem sys;
  sys.samples = static_cast<int>(n);
  sys.W.resize(6 * n, 10);
  sys.b.resize(6 * n);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
      sys.W.block<6, 10>(6 * i, 0) = regressor_row(kin[i]);
      sys.b.segment<6>(6 * i) = wrenches[i].to_vector();
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      sys.W.block<6, 10>(6 * i, 0) = regressor_row(kin[i]);
      sys.b.segment<6>(6 * i) = wrenches[i].to_vector();
    }
  }
  update_rank(sys);
  return sys;
}

}  // namespace ffid
