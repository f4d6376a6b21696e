#include "ffid/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ffid {

Vec10 solve_lsq(StackedSystem& sys) {
  if (sys.singular_values.size() == 0) update_rank(sys);
  if (sys.rank < 10) {
    std::ostringstream os;
    os << "regressor has rank " << sys.rank << " < 10; smallest singular values:";
    const auto k = sys.singular_values.size();
    for (Eigen::Index i = std::max<Eigen::Index>(0, k - 3); i < k; ++i) os << ' ' << sys.singular_values(i);
    throw Error(ErrorKind::rank_deficiency, os.str());
  }
  return sys.W.colPivHouseholderQr().solve(sys.b);
}

double ParameterErrors::composite() const {
  return (mass_relative + inertia_relative + offset_relative) / 3.0;
}

ParameterErrors parameter_errors(const Vec10& estimate, const InertialParams& truth) {
  const InertialParams est = InertialParams::from_vector(estimate);
  ParameterErrors e;
  e.mass = std::abs(est.mass - truth.mass);
  e.inertia_rmse = std::sqrt((est.inertia_c - truth.inertia_c).squaredNorm() / 6.0);
  e.offset = (est.p_off() - truth.p_off()).norm();
  e.mass_relative = e.mass / truth.mass;
  e.inertia_relative = e.inertia_rmse / truth.J_c().norm();
  const double offset_norm = truth.p_off().norm();
  e.offset_relative = offset_norm > 0.0 ? e.offset / offset_norm : 0.0;
  return e;
}

double max_relative_error(const Vec10& estimate, const Vec10& truth) {
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double scale = std::abs(truth(i));
    const double d = std::abs(estimate(i) - truth(i));
    worst = std::max(worst, scale > 0.0 ? d / scale : d);
  }
  return worst;
}

PhaseData phase_data(const MeasurementLog& log, const ActuationMatrix& A) {
  log.validate();
  PhaseData data;
  data.cycles = log.meta.cycles;
  data.pose = cycle_average(log, log.meta.cycles);
  const PeriodicSignal u = cycle_average_inputs(log, log.meta.cycles);
  const int N = u.size();
  data.wrench.resize(N);
  for (int k = 0; k < N; ++k) {
    Vec6 uk = u.samples.row(k).transpose();
    if (log.meta.convention == InputConvention::zoh) {
      uk = 0.5 * (uk + u.samples.row((k + N - 1) % N).transpose());
    }
    data.wrench[k] = A.wrench(uk);
  }
  return data;
}

HarmonicCandidate estimate_candidate(const PhaseData& data, int n) {
  HarmonicCandidate c;
  c.n = n;
  c.energy.residual = std::numeric_limits<double>::infinity();
  try {
    const PeriodicSignal filtered = fft_filter(data.pose, n);
    const FourierTrajectory fit = fit_fourier(filtered, n);
    const auto kin = reconstruct_kinematics(fit, data.pose.size(), data.pose.sample_rate);
    StackedSystem sys = stack_regressor(kin, data.wrench, Execution::serial);
    c.rank = sys.rank;
    const double smin = sys.singular_values(sys.singular_values.size() - 1);
    c.cond_W = smin > 0.0 ? sys.singular_values(0) / smin : std::numeric_limits<double>::infinity();
    c.pi_hat = solve_lsq(sys);
    c.lsq_residual_norm = (sys.W * c.pi_hat - sys.b).norm();
    const InertialParams est = InertialParams::from_vector(c.pi_hat);
    c.physical = est.mass_positive() && est.inertia_positive_definite();
    c.energy = energy_trace(est, kin, data.wrench, data.pose.sample_rate);
    if (!c.physical) c.failure = "estimate is not physical (m <= 0 or inertia not positive definite)";
  } catch (const Error& e) {
    c.failure = e.what();
    c.failure_kind = e.kind();
  }
  return c;
}

const HarmonicCandidate& HarmonicSelection::at(int n) const {
  for (const auto& c : candidates) {
    if (c.n == n) return c;
  }
  throw Error(ErrorKind::invalid_input, "no candidate for harmonic order " + std::to_string(n));
}

const HarmonicCandidate& HarmonicSelection::selected() const { return at(n_star); }

int select_minimum(const std::vector<double>& residuals) {
  double best = std::numeric_limits<double>::infinity();
  for (double r : residuals) {
    if (std::isfinite(r)) best = std::min(best, r);
  }
  if (!std::isfinite(best)) return -1;
  const double tol = std::max(1e-12, kResidualTieTolerance * best);
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    if (std::isfinite(residuals[i]) && residuals[i] <= best + tol) return static_cast<int>(i);
  }
  return -1;
}

HarmonicSelection select_harmonics(const PhaseData& data, int n_lo, int n_hi, Execution exec) {
  const int N = data.pose.size();
  if (n_lo < 1 || n_hi < n_lo || 2 * n_hi >= N) {
    std::ostringstream os;
    os << "harmonic range [" << n_lo << ", " << n_hi << "] is invalid for " << N
       << " samples per period (need 1 <= n_lo <= n_hi < " << (N + 1) / 2 << ")";
    throw Error(ErrorKind::invalid_input, os.str());
  }
  HarmonicSelection sel;
  const int count = n_hi - n_lo + 1;
  sel.candidates.resize(count);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < count; ++i) sel.candidates[i] = estimate_candidate(data, n_lo + i);
  } else {
    for (int i = 0; i < count; ++i) sel.candidates[i] = estimate_candidate(data, n_lo + i);
  }

  std::vector<double> residuals(count);
  for (int i = 0; i < count; ++i) residuals[i] = sel.candidates[i].residual();
  const int best = select_minimum(residuals);
  if (best < 0) {
    const bool all_rank = std::all_of(sel.candidates.begin(), sel.candidates.end(), [](const auto& c) {
      return c.failure_kind == ErrorKind::rank_deficiency;
    });
    if (all_rank) throw Error(ErrorKind::rank_deficiency, sel.candidates.front().failure);
    std::ostringstream os;
    os << "no harmonic order in [" << n_lo << ", " << n_hi << "] gave a usable estimate:";
    for (const auto& c : sel.candidates) os << "\n  n=" << c.n << ": " << c.failure;
    throw Error(ErrorKind::selection_failure, os.str());
  }
  sel.n_star = sel.candidates[best].n;
  return sel;
}

void EstimationConfig::validate() const {
  if (n_min < 1 || n_max < n_min) {
    std::ostringstream os;
    os << "estimation: harmonic range [" << n_min << ", " << n_max << "] is invalid";
    throw Error(ErrorKind::config, os.str());
  }
}

EstimationResult estimate_from_log(const MeasurementLog& log, const ActuationMatrix& A,
                                   const EstimationConfig& cfg, const std::optional<InertialParams>& truth) {
  cfg.validate();
  const PhaseData data = phase_data(log, A);
  EstimationResult r;
  r.selection = select_harmonics(data, cfg.n_min, cfg.n_max, cfg.execution);
  if (truth) {
    for (auto& c : r.selection.candidates) {
      if (c.failure_kind) continue;
      c.errors = parameter_errors(c.pi_hat, *truth);
    }
  }
  const HarmonicCandidate& best = r.selection.selected();
  r.pi_hat = best.pi_hat;
  r.n_star = best.n;
  r.residual_energy = best.residual();
  r.cond_W = best.cond_W;
  r.lsq_residual_norm = best.lsq_residual_norm;
  const InertialParams est = InertialParams::from_vector(r.pi_hat);
  r.mass_positive = est.mass_positive();
  r.inertia_positive_definite = est.inertia_positive_definite();
  r.errors = best.errors;
  return r;
}

std::vector<CriteriaRow> compare_criteria(const std::vector<CriteriaCase>& cases) {
  std::vector<CriteriaRow> rows;
  rows.reserve(cases.size());
  for (const auto& c : cases) {
    rows.push_back({c.criterion, c.trajectory, c.load, c.result.n_star, parameter_errors(c.result.pi_hat, c.truth)});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const CriteriaRow& a, const CriteriaRow& b) {
    if (a.criterion != b.criterion) return a.criterion < b.criterion;
    if (a.trajectory != b.trajectory) return a.trajectory < b.trajectory;
    return a.load < b.load;
  });
  return rows;
}

}  // namespace ffid
