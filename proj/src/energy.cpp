#include "ffid/energy.hpp"

#include <cmath>
#include <limits>

namespace ffid {

namespace {

Vec3 com_velocity(const KinematicSample& k, const Vec3& p_off) {
  return k.velocity + k.R * k.omega.cross(p_off);
}

Vec3 com_acceleration(const KinematicSample& k, const Vec3& p_off) {
  return k.acceleration + k.R * (k.alpha.cross(p_off) + k.omega.cross(k.omega.cross(p_off)));
}

KinematicSample from_state(const RigidBodyState& s) {
  KinematicSample k;
  k.R = s.attitude.toRotationMatrix();
  k.velocity = s.velocity;
  k.omega = s.omega;
  return k;
}

}  // namespace

double kinetic_energy(const InertialParams& params, const KinematicSample& k) {
  const Vec3 v_s = com_velocity(k, params.p_off());
  return 0.5 * params.mass * v_s.squaredNorm() + 0.5 * k.omega.dot(params.J_s() * k.omega);
}

double kinetic_energy(const InertialParams& params, const RigidBodyState& state) {
  return kinetic_energy(params, from_state(state));
}

double input_power(const Wrench& w, const KinematicSample& k) {
  return w.force.dot(k.R.transpose() * k.velocity) + w.moment.dot(k.omega);
}

double input_power(const Wrench& w, const RigidBodyState& state) {
  return input_power(w, from_state(state));
}

double input_power_expanded(const Wrench& w, const KinematicSample& k, const Vec3& p_off) {
  const Vec3 v_s = com_velocity(k, p_off);
  return w.force.dot(k.R.transpose() * v_s) + (w.moment - p_off.cross(w.force)).dot(k.omega);
}

double energy_rate(const InertialParams& params, const KinematicSample& k) {
  const Vec3 p_off = params.p_off();
  const Mat3 J_s = params.J_s();
  const Vec3 v_s = k.R.transpose() * com_velocity(k, p_off);
  const Vec3 a_s = k.R.transpose() * com_acceleration(k, p_off);
  return params.mass * a_s.dot(v_s) + k.omega.dot(J_s * k.alpha + k.omega.cross(J_s * k.omega));
}

double energy_rate(const InertialParams& params, const RigidBodyState& state, const Vec3& a_c,
                   const Vec3& alpha) {
  KinematicSample k = from_state(state);
  k.acceleration = a_c;
  k.alpha = alpha;
  return energy_rate(params, k);
}

EnergyTrace energy_trace(const InertialParams& params, std::span<const KinematicSample> kin,
                         std::span<const Wrench> wrenches, double sample_rate) {
  if (kin.size() != wrenches.size()) {
    throw Error(ErrorKind::invalid_input, "kinematic and wrench sample counts differ");
  }
  EnergyTrace trace;
  const std::size_t n = kin.size();
  trace.t.resize(n);
  trace.P.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    trace.t[i] = static_cast<double>(i) / sample_rate;
    trace.P[i] = input_power(wrenches[i], kin[i]);
  }
  if (!params.mass_positive() || !params.inertia_positive_definite()) {
    trace.residual = std::numeric_limits<double>::infinity();
    return trace;
  }
  trace.Tdot.resize(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    trace.Tdot[i] = energy_rate(params, kin[i]);
    sum += std::abs(trace.P[i] - trace.Tdot[i]);
  }
  trace.residual = n > 0 ? sum / static_cast<double>(n) : 0.0;
  return trace;
}

}  // namespace ffid
