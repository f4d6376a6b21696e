#pragma once

/**
 * @file energy.hpp
 * @brief Input power and kinetic-energy balance used to rank candidate fits.
 *
 * With v_s the inertial velocity of the system centre of mass,
 *
 *   T = ½ m v_sᵀ v_s + ½ ωᵀ J_s ω
 *   P = Fᵀ Rᵀ ṗ_c + Mᵀ ω
 *
 * and Ṫ = P holds for the exact wrench, whatever the centre-of-mass offset.
 */

#include <span>
#include <vector>

#include "ffid/common.hpp"
#include "ffid/dynamics.hpp"
#include "ffid/regressor.hpp"

namespace ffid {

double kinetic_energy(const InertialParams& params, const RigidBodyState& state);
double kinetic_energy(const InertialParams& params, const KinematicSample& k);

/// P = Fᵀ Rᵀ ṗ_c + Mᵀ ω. Independent of the inertial parameters.
double input_power(const Wrench& w, const KinematicSample& k);
double input_power(const Wrench& w, const RigidBodyState& state);

/// The same power written through the system centre of mass:
/// P = Fᵀ Rᵀ ṗ_s + (M − p_off × F)ᵀ ω.
double input_power_expanded(const Wrench& w, const KinematicSample& k, const Vec3& p_off);

/// Ṫ = m (Rᵀ p̈_s)ᵀ (Rᵀ ṗ_s) + ωᵀ (J_s ω̇ + ω × J_s ω).
double energy_rate(const InertialParams& params, const KinematicSample& k);
double energy_rate(const InertialParams& params, const RigidBodyState& state, const Vec3& a_c,
                   const Vec3& alpha);

/// P and Ṫ over one period and the mean of |P − Ṫ|.
struct EnergyTrace {
  std::vector<double> t;
  std::vector<double> P;
  std::vector<double> Tdot;
  double residual = 0.0;
};

/// Evaluates the balance for a parameter estimate. If the estimate is not
/// physical (m ≤ 0 or J_s not positive definite) the residual is +∞ and the
/// Ṫ column is left empty.
EnergyTrace energy_trace(const InertialParams& params, std::span<const KinematicSample> kin,
                         std::span<const Wrench> wrenches, double sample_rate);

}  // namespace ffid
