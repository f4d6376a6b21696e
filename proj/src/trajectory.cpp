#include "ffid/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ffid/random.hpp"

namespace ffid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

FourierTrajectory FourierTrajectory::zero(double omega_f, int harmonics) {
  FourierTrajectory t;
  t.omega_f = omega_f;
  t.harmonics = harmonics;
  for (auto& ax : t.axes) {
    ax.a0 = 0.0;
    ax.a = Eigen::VectorXd::Zero(harmonics);
    ax.b = Eigen::VectorXd::Zero(harmonics);
  }
  return t;
}

double FourierTrajectory::period() const { return 2.0 * std::numbers::pi / omega_f; }

Eigen::VectorXd FourierTrajectory::coefficients() const {
  const int per_axis = 2 * harmonics + 1;
  Eigen::VectorXd d(6 * per_axis);
  for (int i = 0; i < 6; ++i) {
    d(i * per_axis) = axes[i].a0;
    d.segment(i * per_axis + 1, harmonics) = axes[i].a;
    d.segment(i * per_axis + 1 + harmonics, harmonics) = axes[i].b;
  }
  return d;
}

FourierTrajectory FourierTrajectory::from_coefficients(double omega_f, int harmonics,
                                                       const Eigen::VectorXd& d) {
  const int per_axis = 2 * harmonics + 1;
  if (d.size() != 6 * per_axis) throw Error(ErrorKind::invalid_input, "coefficient vector has wrong length");
  FourierTrajectory t = zero(omega_f, harmonics);
  for (int i = 0; i < 6; ++i) {
    t.axes[i].a0 = d(i * per_axis);
    t.axes[i].a = d.segment(i * per_axis + 1, harmonics);
    t.axes[i].b = d.segment(i * per_axis + 1 + harmonics, harmonics);
  }
  return t;
}

TrajectorySample eval(const FourierTrajectory& traj, double t) {
  TrajectorySample s;
  for (int i = 0; i < 6; ++i) {
    const AxisSeries& ax = traj.axes[i];
    double x = ax.a0, v = 0.0, a = 0.0;
    for (int k = 1; k <= traj.harmonics; ++k) {
      const double wk = traj.omega_f * k;
      const double sn = std::sin(wk * t), cs = std::cos(wk * t);
      const double ak = ax.a(k - 1), bk = ax.b(k - 1);
      x += ak / wk * sn - bk / wk * cs;
      v += ak * cs + bk * sn;
      a += -ak * wk * sn + bk * wk * cs;
    }
    s.X(i) = x;
    s.Xdot(i) = v;
    s.Xddot(i) = a;
  }
  return s;
}

MotionBounds MotionBounds::symmetric(double pos, double ang, double vel, double rate, double acc,
                                     double ang_acc) {
  MotionBounds b;
  b.x_max << pos, pos, pos, ang, ang, ang;
  b.v_max << vel, vel, vel, rate, rate, rate;
  b.a_max << acc, acc, acc, ang_acc, ang_acc, ang_acc;
  b.x_min = -b.x_max;
  b.v_min = -b.v_max;
  b.a_min = -b.a_max;
  return b;
}

MotionBounds MotionBounds::defaults() { return symmetric(0.5, 0.4, 0.5, 0.5, 1.0, 1.0); }

const char* to_string(Criterion c) { return c == Criterion::J1 ? "J1" : "J2"; }

Criterion criterion_from_string(const std::string& s) {
  if (s == "J1" || s == "j1") return Criterion::J1;
  if (s == "J2" || s == "j2") return Criterion::J2;
  throw Error(ErrorKind::config, "unknown excitation criterion '" + s + "' (expected J1 or J2)");
}

double ExcitationConfig::omega_f() const { return 2.0 * std::numbers::pi / period; }

void ExcitationConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::config, "excitation: " + msg); };
  if (!(period > 0.0) || !std::isfinite(period)) fail("period must be positive");
  if (harmonics < 1) fail("harmonic count must be at least 1");
  if (samples < 10 * harmonics) fail("need at least 10 samples per harmonic");
  if (multistart < 1) fail("multistart count must be at least 1");
  if (local_iterations < 1) fail("local iteration count must be at least 1");
  const Vec6* all[] = {&bounds.x_min, &bounds.x_max, &bounds.v_min, &bounds.v_max, &bounds.a_min, &bounds.a_max};
  for (const Vec6* v : all) {
    if (!v->allFinite()) fail("motion bounds must be finite");
  }
  // The rest conditions put every coordinate, rate and acceleration at zero.
  if ((bounds.x_min.array() > 0.0).any() || (bounds.x_max.array() < 0.0).any() ||
      (bounds.v_min.array() > 0.0).any() || (bounds.v_max.array() < 0.0).any() ||
      (bounds.a_min.array() > 0.0).any() || (bounds.a_max.array() < 0.0).any()) {
    fail("motion bounds must contain zero (the trajectory starts and ends at rest)");
  }
  if (!sigma.allFinite()) fail("wrench covariance must be finite");
  Eigen::LLT<Mat6> llt(sigma);
  if (llt.info() != Eigen::Success) fail("wrench covariance must be positive definite");
}

Mat6 wrench_covariance(const ActuationMatrix& A, double sigma_u) {
  const Vec6 var = Vec6::Constant(sigma_u * sigma_u);
  return A.matrix() * var.asDiagonal() * A.matrix().transpose();
}

namespace {

Mat6 inverse_sqrt(const Mat6& sigma) {
  Eigen::SelfAdjointEigenSolver<Mat6> es(sigma);
  if (es.info() != Eigen::Success || (es.eigenvalues().array() <= 0.0).any()) {
    throw Error(ErrorKind::invalid_input, "wrench covariance must be positive definite");
  }
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

Eigen::MatrixXd normalise(const Eigen::MatrixXd& W, const Mat6& L) {
  if (W.rows() % 6 != 0) throw Error(ErrorKind::invalid_input, "regressor row count must be a multiple of 6");
  Eigen::MatrixXd out(W.rows(), W.cols());
  for (Eigen::Index i = 0; i < W.rows(); i += 6) out.middleRows(i, 6) = L * W.middleRows(i, 6);
  return out;
}

double j1_normalised(const Eigen::MatrixXd& Wn) {
  if (Wn.rows() < Wn.cols() || !Wn.allFinite()) return kInf;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Wn);
  const auto& s = svd.singularValues();
  const double smax = s(0), smin = s(s.size() - 1);
  if (!(smax > 0.0) || smin <= kRankTolerance * smax) return kInf;
  return smax / smin;
}

double j2_normalised(const Eigen::MatrixXd& Wn) {
  if (Wn.rows() < Wn.cols() || !Wn.allFinite()) return kInf;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Wn);
  const Eigen::MatrixXd& qrm = qr.matrixQR();
  double maxd = 0.0;
  for (Eigen::Index i = 0; i < Wn.cols(); ++i) maxd = std::max(maxd, std::abs(qrm(i, i)));
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < Wn.cols(); ++i) {
    const double d = std::abs(qrm(i, i));
    if (!(maxd > 0.0) || d <= kRankTolerance * maxd) return kInf;
    logdet += 2.0 * std::log(d);
  }
  return -logdet;
}

}  // namespace

double criterion_J1(const Eigen::MatrixXd& W, const Mat6& sigma) {
  return j1_normalised(normalise(W, inverse_sqrt(sigma)));
}

double criterion_J2(const Eigen::MatrixXd& W, const Mat6& sigma) {
  return j2_normalised(normalise(W, inverse_sqrt(sigma)));
}

double evaluate_criterion(Criterion c, const Eigen::MatrixXd& W, const Mat6& sigma) {
  return c == Criterion::J1 ? criterion_J1(W, sigma) : criterion_J2(W, sigma);
}

StackedSystem trajectory_regressor(const FourierTrajectory& traj, int samples) {
  const double T = traj.period();
  std::vector<RegressorRow> rows(samples);
  std::vector<Wrench> zeros(samples);
  for (int j = 0; j < samples; ++j) {
    const TrajectorySample s = eval(traj, T * j / samples);
    rows[j] = regressor_row(kinematic_sample(s.X, s.Xdot, s.Xddot));
  }
  return assemble(rows, zeros);
}

Eigen::MatrixXd rest_nullspace(double omega_f, int harmonics) {
  const int n = harmonics;
  const int per_axis = 2 * n + 1;
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(3, per_axis);
  C(0, 0) = 1.0;
  for (int k = 1; k <= n; ++k) {
    const double wk = omega_f * k;
    C(0, n + k) = -1.0 / wk;  // X(0)
    C(1, k) = 1.0;            // Ẋ(0)
    C(2, n + k) = wk;         // Ẍ(0)
  }
  const int rank = std::min(3, per_axis);
  if (per_axis <= rank) return Eigen::MatrixXd::Zero(per_axis, 0);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(C.transpose());
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(per_axis, per_axis);
  return Q.rightCols(per_axis - rank);
}

namespace {

/// Collocation tables and the reduced parameterisation δ = Z ξ (per axis).
class ExcitationProblem {
 public:
  explicit ExcitationProblem(const ExcitationConfig& cfg)
      : cfg_(cfg),
        n_(cfg.harmonics),
        N_(cfg.samples),
        w_(cfg.omega_f()),
        Z_(rest_nullspace(w_, n_)),
        L_(inverse_sqrt(cfg.sigma)),
        sin_(N_, n_),
        cos_(N_, n_) {
    for (int j = 0; j < N_; ++j) {
      const double t = cfg.period * j / N_;
      for (int k = 1; k <= n_; ++k) {
        sin_(j, k - 1) = std::sin(w_ * k * t);
        cos_(j, k - 1) = std::cos(w_ * k * t);
      }
    }
  }

  int reduced_size() const { return 6 * static_cast<int>(Z_.cols()); }

  Eigen::VectorXd expand(const Eigen::VectorXd& xi) const {
    const int per_axis = 2 * n_ + 1;
    const auto d = Z_.cols();
    Eigen::VectorXd delta(6 * per_axis);
    for (int i = 0; i < 6; ++i) delta.segment(i * per_axis, per_axis) = Z_ * xi.segment(i * d, d);
    return delta;
  }

  Eigen::VectorXd reduce(const Eigen::VectorXd& delta) const {
    const int per_axis = 2 * n_ + 1;
    const auto d = Z_.cols();
    Eigen::VectorXd xi(6 * d);
    for (int i = 0; i < 6; ++i) xi.segment(i * d, d) = Z_.transpose() * delta.segment(i * per_axis, per_axis);
    return xi;
  }

  struct Samples {
    Eigen::MatrixXd X, V, A;  // N x 6
  };

  Samples sample(const Eigen::VectorXd& xi) const {
    const Eigen::VectorXd delta = expand(xi);
    const int per_axis = 2 * n_ + 1;
    Samples s{Eigen::MatrixXd(N_, 6), Eigen::MatrixXd(N_, 6), Eigen::MatrixXd(N_, 6)};
    Eigen::VectorXd inv_wk(n_), wk(n_);
    for (int k = 1; k <= n_; ++k) {
      wk(k - 1) = w_ * k;
      inv_wk(k - 1) = 1.0 / (w_ * k);
    }
    for (int i = 0; i < 6; ++i) {
      const double a0 = delta(i * per_axis);
      const Eigen::VectorXd a = delta.segment(i * per_axis + 1, n_);
      const Eigen::VectorXd b = delta.segment(i * per_axis + 1 + n_, n_);
      s.X.col(i) = (sin_ * a.cwiseProduct(inv_wk) - cos_ * b.cwiseProduct(inv_wk)).array() + a0;
      s.V.col(i) = cos_ * a + sin_ * b;
      s.A.col(i) = -sin_ * a.cwiseProduct(wk) + cos_ * b.cwiseProduct(wk);
    }
    return s;
  }

  /// Largest ratio of a sampled value to the bound on its side (≤ 1 inside).
  double bound_ratio(const Samples& s) const {
    double r = 0.0;
    auto scan = [&](const Eigen::MatrixXd& m, const Vec6& lo, const Vec6& hi) {
      for (int j = 0; j < m.rows(); ++j) {
        for (int i = 0; i < 6; ++i) {
          const double v = m(j, i);
          if (v > 0.0) r = std::max(r, hi(i) > 0.0 ? v / hi(i) : (v > 1e-300 ? kInf : 0.0));
          else if (v < 0.0) r = std::max(r, lo(i) < 0.0 ? v / lo(i) : (v < -1e-300 ? kInf : 0.0));
        }
      }
    };
    scan(s.X, cfg_.bounds.x_min, cfg_.bounds.x_max);
    scan(s.V, cfg_.bounds.v_min, cfg_.bounds.v_max);
    scan(s.A, cfg_.bounds.a_min, cfg_.bounds.a_max);
    return r;
  }

  double penalty(const Samples& s) const {
    double p = 0.0;
    auto scan = [&](const Eigen::MatrixXd& m, const Vec6& lo, const Vec6& hi) {
      for (int i = 0; i < 6; ++i) {
        const double scale = std::max(hi(i) - lo(i), 1e-12);
        for (int j = 0; j < m.rows(); ++j) {
          const double v = m(j, i);
          const double viol = std::max(0.0, v - hi(i)) + std::max(0.0, lo(i) - v);
          p += (viol / scale) * (viol / scale);
        }
      }
    };
    scan(s.X, cfg_.bounds.x_min, cfg_.bounds.x_max);
    scan(s.V, cfg_.bounds.v_min, cfg_.bounds.v_max);
    scan(s.A, cfg_.bounds.a_min, cfg_.bounds.a_max);
    return p;
  }

  double criterion(const Samples& s) const {
    Eigen::MatrixXd Wn(6 * N_, 10);
    for (int j = 0; j < N_; ++j) {
      if (std::abs(std::cos(s.X(j, 4))) < 1e-3) return kInf;
      const KinematicSample k = kinematic_sample(s.X.row(j).transpose(), s.V.row(j).transpose(),
                                                 s.A.row(j).transpose());
      Wn.middleRows(6 * j, 6) = L_ * regressor_row(k);
    }
    return cfg_.criterion == Criterion::J1 ? j1_normalised(Wn) : j2_normalised(Wn);
  }

  double objective(const Eigen::VectorXd& xi, double mu) const {
    const Samples s = sample(xi);
    const double j = criterion(s);
    if (!std::isfinite(j)) return kInf;
    return j + mu * penalty(s);
  }

  /// Shrinks ξ uniformly until every collocation sample is inside its box.
  Eigen::VectorXd make_feasible(const Eigen::VectorXd& xi) const {
    const double r = bound_ratio(sample(xi));
    if (r <= 1.0) return xi;
    if (!std::isfinite(r)) return Eigen::VectorXd::Zero(xi.size());
    return xi / r;
  }

  Eigen::VectorXd random_start(Rng& rng) const {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::VectorXd delta(6 * (2 * n_ + 1));
    for (Eigen::Index i = 0; i < delta.size(); ++i) delta(i) = unif(rng);
    return make_feasible(reduce(delta));
  }

  FourierTrajectory to_trajectory(const Eigen::VectorXd& xi) const {
    return FourierTrajectory::from_coefficients(w_, n_, expand(xi));
  }

 private:
  const ExcitationConfig& cfg_;
  int n_;
  int N_;
  double w_;
  Eigen::MatrixXd Z_;
  Mat6 L_;
  Eigen::MatrixXd sin_, cos_;
};

Eigen::VectorXd fd_gradient(const ExcitationProblem& prob, const Eigen::VectorXd& x, double fx, double mu) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-7 * std::max(1.0, std::abs(x(i)));
    xp(i) = x(i) + h;
    double fp = prob.objective(xp, mu);
    if (std::isfinite(fp)) {
      g(i) = (fp - fx) / h;
    } else {
      xp(i) = x(i) - h;
      const double fm = prob.objective(xp, mu);
      g(i) = std::isfinite(fm) ? (fx - fm) / h : 0.0;
    }
    xp(i) = x(i);
  }
  return g;
}

/// BFGS with Armijo backtracking on the penalised objective.
Eigen::VectorXd quasi_newton(const ExcitationProblem& prob, Eigen::VectorXd x, double mu, int iterations) {
  double fx = prob.objective(x, mu);
  if (!std::isfinite(fx)) return x;
  Eigen::VectorXd g = fd_gradient(prob, x, fx, mu);
  const auto n = x.size();
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;

  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXd p = -H * g;
    double slope = g.dot(p);
    if (!(slope < 0.0)) {
      H.setIdentity();
      p = -g;
      slope = -g.squaredNorm();
      if (!(slope < 0.0)) break;
    }
    double step = 1.0;
    double fn = kInf;
    Eigen::VectorXd xn;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      xn = x + step * p;
      fn = prob.objective(xn, mu);
      if (std::isfinite(fn) && fn <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    const Eigen::VectorXd gn = fd_gradient(prob, xn, fn, mu);
    const Eigen::VectorXd s = xn - x;
    const Eigen::VectorXd y = gn - g;
    const double ys = y.dot(s);
    if (ys > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        H *= ys / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / ys;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    const double df = fx - fn;
    x = xn;
    fx = fn;
    g = gn;
    if (df <= 1e-12 * (1.0 + std::abs(fx)) && s.norm() <= 1e-10 * (1.0 + x.norm())) break;
  }
  return x;
}

struct StartResult {
  Eigen::VectorXd xi;
  double criterion = kInf;
};

StartResult run_start(const ExcitationProblem& prob, const ExcitationConfig& cfg, std::uint64_t seed, int index) {
  Rng rng(derive_seed(seed, "excitation-start", static_cast<std::uint64_t>(index)));
  const Eigen::VectorXd x0 = prob.random_start(rng);

  StartResult best;
  best.xi = x0;
  best.criterion = prob.criterion(prob.sample(x0));

  Eigen::VectorXd x = x0;
  for (double mu : {1e2, 1e4, 1e6}) x = quasi_newton(prob, x, mu, cfg.local_iterations);
  const Eigen::VectorXd xf = prob.make_feasible(x);
  const double jf = prob.criterion(prob.sample(xf));
  if (jf < best.criterion) {
    best.xi = xf;
    best.criterion = jf;
  }
  return best;
}

}  // namespace

double max_bound_violation(const FourierTrajectory& traj, const MotionBounds& b, int samples) {
  const double T = traj.period();
  double worst = 0.0;
  auto check = [&worst](const Vec6& v, const Vec6& lo, const Vec6& hi) {
    worst = std::max(worst, (v - hi).maxCoeff());
    worst = std::max(worst, (lo - v).maxCoeff());
  };
  for (int j = 0; j < samples; ++j) {
    const TrajectorySample s = eval(traj, T * j / samples);
    check(s.X, b.x_min, b.x_max);
    check(s.Xdot, b.v_min, b.v_max);
    check(s.Xddot, b.a_min, b.a_max);
  }
  return worst;
}

FourierTrajectory random_feasible_trajectory(const ExcitationConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ExcitationProblem prob(cfg);
  Rng rng(seed);
  return prob.to_trajectory(prob.random_start(rng));
}

ExcitationResult optimize_trajectory(const ExcitationConfig& cfg, std::uint64_t seed, Execution exec) {
  cfg.validate();
  ExcitationProblem prob(cfg);
  if (prob.reduced_size() == 0) {
    throw Error(ErrorKind::infeasible_config,
                "the rest conditions leave no free coefficients; use at least 2 harmonics");
  }

  std::vector<StartResult> starts(cfg.multistart);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < cfg.multistart; ++i) starts[i] = run_start(prob, cfg, seed, i);
  } else {
    for (int i = 0; i < cfg.multistart; ++i) starts[i] = run_start(prob, cfg, seed, i);
  }

  ExcitationResult result;
  for (int i = 0; i < cfg.multistart; ++i) {
    if (!std::isfinite(starts[i].criterion)) continue;
    ++result.feasible_starts;
    if (result.best_start < 0 || starts[i].criterion < result.criterion) {
      result.best_start = i;
      result.criterion = starts[i].criterion;
    }
  }
  if (result.best_start < 0) {
    std::ostringstream os;
    os << "no feasible full-rank excitation found in " << cfg.multistart << " starts";
    throw Error(ErrorKind::infeasible_config, os.str());
  }
  result.trajectory = prob.to_trajectory(starts[result.best_start].xi);
  return result;
}

}  // namespace ffid
