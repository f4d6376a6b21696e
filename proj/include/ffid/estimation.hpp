#pragma once

/**
 * @file estimation.hpp
 * @brief From a measurement log to an inertial-parameter estimate: phase
 *        averaging, per-order Fourier fits, least squares and selection of
 *        the harmonic order by energy balance.
 */

#include <optional>
#include <string>
#include <vector>

#include "ffid/common.hpp"
#include "ffid/dynamics.hpp"
#include "ffid/energy.hpp"
#include "ffid/measurement_log.hpp"
#include "ffid/regressor.hpp"
#include "ffid/signal.hpp"
#include "ffid/trajectory.hpp"

namespace ffid {

/// Minimises ‖W π − b‖ with a column-pivoted QR. Throws rank_deficiency,
/// listing the smallest singular values, when rank(W) < 10.
Vec10 solve_lsq(StackedSystem& sys);

/// Absolute errors of an estimate against ground truth. Inertia is compared
/// on the six components about the body-frame origin.
struct ParameterErrors {
  double mass = 0.0;          ///< |Δm|, kg
  double inertia_rmse = 0.0;  ///< kg·m²
  double offset = 0.0;        ///< ‖Δp_off‖, m
  double mass_relative = 0.0;     ///< |Δm| / m
  double inertia_relative = 0.0;  ///< RMSE / ‖J_c‖_F
  double offset_relative = 0.0;   ///< ‖Δp_off‖ / ‖p_off‖ (0 if p_off = 0)

  /// Mean of the three relative errors.
  double composite() const;
};

ParameterErrors parameter_errors(const Vec10& estimate, const InertialParams& truth);

/// Largest relative error over the ten components of π.
double max_relative_error(const Vec10& estimate, const Vec10& truth);

/// One period of cycle-averaged pose and the matching body wrench samples.
struct PhaseData {
  PeriodicSignal pose;
  std::vector<Wrench> wrench;
  int cycles = 1;
};

/// Averages pose and commands across cycles and maps commands through A.
/// For held (zoh) commands the wrench at t_k is the mean of the averaged
/// commands of the bins on either side of t_k.
PhaseData phase_data(const MeasurementLog& log, const ActuationMatrix& A);

/// Estimate obtained from a Fourier fit of order n.
struct HarmonicCandidate {
  int n = 0;
  Vec10 pi_hat = Vec10::Zero();
  bool physical = false;
  int rank = 0;
  double cond_W = 0.0;
  double lsq_residual_norm = 0.0;
  EnergyTrace energy;
  std::string failure;  ///< empty when the fit produced an estimate
  std::optional<ErrorKind> failure_kind;
  std::optional<ParameterErrors> errors;

  double residual() const { return energy.residual; }
};

HarmonicCandidate estimate_candidate(const PhaseData& data, int n);

struct HarmonicSelection {
  int n_star = 0;
  std::vector<HarmonicCandidate> candidates;  ///< ordered by n

  const HarmonicCandidate& selected() const;
  const HarmonicCandidate& at(int n) const;
};

/// Relative tolerance under which two residuals count as tied.
inline constexpr double kResidualTieTolerance = 1e-9;

/// Index of the smallest residual; ties (within kResidualTieTolerance,
/// relative, or 1e-12 absolute) go to the lowest index. −1 if none is finite.
int select_minimum(const std::vector<double>& residuals);

/// Fits every order in [n_lo, n_hi] and selects the order with the smallest
/// mean |P − Ṫ|. Throws invalid_input for an invalid range, rank_deficiency if
/// every order is rank deficient and selection_failure if no candidate is
/// physical. Both execution modes return identical results.
HarmonicSelection select_harmonics(const PhaseData& data, int n_lo, int n_hi,
                                   Execution exec = Execution::parallel);

struct EstimationConfig {
  int n_min = 3;
  int n_max = 20;
  Execution execution = Execution::parallel;

  void validate() const;
};

struct EstimationResult {
  Vec10 pi_hat = Vec10::Zero();
  int n_star = 0;
  double residual_energy = 0.0;
  double cond_W = 0.0;
  double lsq_residual_norm = 0.0;
  bool mass_positive = false;
  bool inertia_positive_definite = false;
  std::optional<ParameterErrors> errors;
  HarmonicSelection selection;
};

/// Full chain on a log. Per-order errors are filled when truth is given.
EstimationResult estimate_from_log(const MeasurementLog& log, const ActuationMatrix& A,
                                   const EstimationConfig& cfg,
                                   const std::optional<InertialParams>& truth = std::nullopt);

/// One scenario of a criteria comparison.
struct CriteriaCase {
  Criterion criterion = Criterion::J1;
  int trajectory = 0;
  std::string load;
  InertialParams truth;
  EstimationResult result;
};

struct CriteriaRow {
  Criterion criterion = Criterion::J1;
  int trajectory = 0;
  std::string load;
  int n_star = 0;
  ParameterErrors errors;
};

/// Error table grouped by criterion, then trajectory, then load.
std::vector<CriteriaRow> compare_criteria(const std::vector<CriteriaCase>& cases);

}  // namespace ffid
