#include "ffid/dynamics.hpp"

#include <limits>
#include <sstream>

namespace ffid {

namespace {

bool positive_definite(const Mat3& m) {
  if (!m.allFinite()) return false;
  Eigen::LLT<Mat3> llt(0.5 * (m + m.transpose()));
  return llt.info() == Eigen::Success;
}

// m [(pᵀp) I − p pᵀ]
Mat3 offset_inertia(double mass, const Vec3& p) {
  return mass * (p.squaredNorm() * Mat3::Identity() - p * p.transpose());
}

}  // namespace

Mat3 symmetric_from_components(const Vec6& c) {
  Mat3 m;
  m << c(0), c(1), c(2),
       c(1), c(3), c(4),
       c(2), c(4), c(5);
  return m;
}

Vec6 components_from_symmetric(const Mat3& m) {
  Vec6 c;
  c << m(0, 0), m(0, 1), m(0, 2), m(1, 1), m(1, 2), m(2, 2);
  return c;
}

InertialParams InertialParams::from_vector(const Vec10& pi) {
  InertialParams p;
  p.mass = pi(0);
  p.first_moment = pi.segment<3>(1);
  p.inertia_c = pi.tail<6>();
  return p;
}

InertialParams InertialParams::from_com(double mass, const Vec3& p_off, const Mat3& J_s) {
  InertialParams p;
  p.mass = mass;
  p.first_moment = mass * p_off;
  p.inertia_c = components_from_symmetric(parallel_axis(J_s, mass, p_off));
  return p;
}

Vec10 InertialParams::to_vector() const {
  Vec10 pi;
  pi << mass, first_moment, inertia_c;
  return pi;
}

Mat3 InertialParams::J_s() const {
  return J_c() - offset_inertia(mass, p_off());
}

bool InertialParams::inertia_positive_definite() const {
  if (!mass_positive()) return false;
  return positive_definite(J_c()) && positive_definite(J_s());
}

void InertialParams::validate() const {
  if (!mass_positive()) {
    std::ostringstream os;
    os << "mass must be positive and finite, got " << mass;
    throw Error(ErrorKind::inconsistent_parameters, os.str());
  }
  if (!first_moment.allFinite() || !inertia_c.allFinite()) {
    throw Error(ErrorKind::inconsistent_parameters, "non-finite inertial parameters");
  }
  if (!positive_definite(J_c())) {
    throw Error(ErrorKind::inconsistent_parameters, "inertia about the body origin is not positive definite");
  }
  if (!positive_definite(J_s())) {
    throw Error(ErrorKind::inconsistent_parameters, "inertia about the centre of mass is not positive definite");
  }
}

InertialParams attach_load(const InertialParams& base, double load_mass, const Vec3& load_position,
                           const Mat3& load_inertia) {
  InertialParams out;
  out.mass = base.mass + load_mass;
  out.first_moment = base.first_moment + load_mass * load_position;
  out.inertia_c = base.inertia_c +
                  components_from_symmetric(load_inertia + offset_inertia(load_mass, load_position));
  return out;
}

Mat3 parallel_axis(const Mat3& J_s, double mass, const Vec3& p_off) {
  return J_s + offset_inertia(mass, p_off);
}

Mat3 parallel_axis_inv(const Mat3& J_c, double mass, const Vec3& p_off) {
  Mat3 J_s = J_c - offset_inertia(mass, p_off);
  if (!positive_definite(J_s)) {
    throw Error(ErrorKind::inconsistent_parameters,
                "inertia about the centre of mass is not positive definite");
  }
  return J_s;
}

ActuatorBounds ActuatorBounds::unbounded() {
  const double inf = std::numeric_limits<double>::infinity();
  return {Vec6::Constant(-inf), Vec6::Constant(inf)};
}

ActuatorCommand saturate(const Vec6& u, const ActuatorBounds& bounds) {
  ActuatorCommand cmd;
  for (int i = 0; i < 6; ++i) {
    double v = u(i);
    if (v <= bounds.lower(i)) {
      v = bounds.lower(i);
      cmd.saturated = true;
    } else if (v >= bounds.upper(i)) {
      v = bounds.upper(i);
      cmd.saturated = true;
    }
    cmd.u(i) = v;
  }
  return cmd;
}

ActuationMatrix::ActuationMatrix(const Mat6& A) : A_(A) {
  if (!A.allFinite()) throw Error(ErrorKind::invalid_input, "actuation matrix has non-finite entries");
  Eigen::JacobiSVD<Mat6> svd(A);
  const auto& s = svd.singularValues();
  if (!(s(5) > 0.0) || s(0) / s(5) > 1e12) {
    throw Error(ErrorKind::invalid_input, "actuation matrix is not invertible");
  }
  cond_ = s(0) / s(5);
  A_inv_ = A.inverse();
}

ActuationMatrix ActuationMatrix::illustrative() {
  // Six propellers on a 0.2 m hexagon, thrust axes tilted ±55° about the
  // radial direction in alternation, small reaction torque along the axis.
  Mat6 A;
  A << 0.0,       1.030677, -1.030677, 0.0,       1.030677, -1.030677,
       1.190123, -0.595062, -0.595062, 1.190123, -0.595062, -0.595062,
       0.833333,  0.833333,  0.833333, 0.833333,  0.833333,  0.833333,
       0.0,       0.123724,  0.123724, 0.0,      -0.123724, -0.123724,
      -0.142864, -0.071432,  0.071432, 0.142864,  0.071432, -0.071432,
       0.254691, -0.254691,  0.254691, -0.254691, 0.254691, -0.254691;
  return ActuationMatrix(A);
}

Wrench ActuationMatrix::wrench(const Vec6& u) const {
  return Wrench::from_vector(A_ * u);
}

Wrench wrench_from_actuation(const ActuationMatrix& A, const Vec6& u) {
  if (!u.allFinite()) throw Error(ErrorKind::invalid_input, "actuator command has non-finite entries");
  return A.wrench(u);
}

Acceleration forward_dynamics(const InertialParams& params, const RigidBodyState& state,
                              const Wrench& wrench) {
  return RigidBodyModel(params).accelerate(state, wrench);
}

Wrench inverse_dynamics(const InertialParams& params, const RigidBodyState& state,
                        const Acceleration& acc) {
  const Mat3 R = state.attitude.toRotationMatrix();
  const Vec3& w = state.omega;
  const Vec3& dw = acc.angular;
  const Vec3 p = params.p_off();
  const Mat3 J_s = params.J_s();

  Wrench out;
  out.force = params.mass * (R.transpose() * acc.linear + dw.cross(p) + w.cross(w.cross(p)));
  out.moment = J_s * dw + w.cross(J_s * w) + p.cross(out.force);
  return out;
}

RigidBodyModel::RigidBodyModel(const InertialParams& params)
    : params_(params), mass_(params.mass), p_off_(params.p_off()), J_s_(params.J_s()) {
  if (!params.mass_positive()) {
    throw Error(ErrorKind::singular_inertia, "mass must be positive");
  }
  Eigen::FullPivLU<Mat3> lu(J_s_);
  if (!J_s_.allFinite() || !lu.isInvertible() || lu.rcond() < 1e-12) {
    throw Error(ErrorKind::singular_inertia, "inertia about the centre of mass is singular");
  }
  J_s_inv_ = lu.inverse();
}

Acceleration RigidBodyModel::accelerate(const RigidBodyState& state, const Wrench& wrench) const {
  const Mat3 R = state.attitude.toRotationMatrix();
  const Vec3& w = state.omega;
  Acceleration acc;
  acc.angular = J_s_inv_ * (wrench.moment - w.cross(J_s_ * w) - p_off_.cross(wrench.force));
  acc.linear = R * (wrench.force / mass_ - acc.angular.cross(p_off_) - w.cross(w.cross(p_off_)));
  return acc;
}

namespace {

struct Derivative {
  Vec3 dp;
  Vec3 dv;
  Eigen::Vector4d dq;  // w, x, y, z
  Vec3 dw;
};

Eigen::Vector4d quat_rate(const Quat& q, const Vec3& w) {
  // ½ q ⊗ (0, ω)
  Quat r = q * Quat(0.0, w.x(), w.y(), w.z());
  return 0.5 * Eigen::Vector4d(r.w(), r.x(), r.y(), r.z());
}

RigidBodyState advance(const RigidBodyState& s, const Derivative& d, double h) {
  RigidBodyState out;
  out.position = s.position + h * d.dp;
  out.velocity = s.velocity + h * d.dv;
  out.attitude = Quat(s.attitude.w() + h * d.dq(0), s.attitude.x() + h * d.dq(1),
                      s.attitude.y() + h * d.dq(2), s.attitude.z() + h * d.dq(3));
  out.omega = s.omega + h * d.dw;
  return out;
}

}  // namespace

RigidBodyState RigidBodyModel::step(const RigidBodyState& s, const Wrench& wrench, double dt) const {
  auto deriv = [&](const RigidBodyState& x) {
    Acceleration a = accelerate(x, wrench);
    return Derivative{x.velocity, a.linear, quat_rate(x.attitude, x.omega), a.angular};
  };
  const Derivative k1 = deriv(s);
  const Derivative k2 = deriv(advance(s, k1, 0.5 * dt));
  const Derivative k3 = deriv(advance(s, k2, 0.5 * dt));
  const Derivative k4 = deriv(advance(s, k3, dt));

  Derivative sum;
  sum.dp = k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp;
  sum.dv = k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv;
  sum.dq = k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq;
  sum.dw = k1.dw + 2.0 * k2.dw + 2.0 * k3.dw + k4.dw;

  RigidBodyState out = advance(s, sum, dt / 6.0);
  out.attitude.normalize();
  return out;
}

RigidBodyState integrate_step(const InertialParams& params, const RigidBodyState& state,
                              const Wrench& wrench, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::invalid_input, "integration step must be positive");
  return RigidBodyModel(params).step(state, wrench, dt);
}

RigidBodyState integrate_step(const InertialParams& params, const ActuationMatrix& A,
                              const RigidBodyState& state, const Vec6& u, double dt) {
  return integrate_step(params, state, wrench_from_actuation(A, u), dt);
}

}  // namespace ffid
