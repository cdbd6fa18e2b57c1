#pragma once

/// @file
/// Wild residual bootstrap for break and joint statistics.
///
/// The predictive regression and the regressor autoregression are fitted by
/// OLS. Draw b rebuilds the regressors from the bias-corrected autoregression
/// and the dependent series under the null, with both residual series scaled
/// by one common multiplier per period.

#include "ivxlab/breaktests.hpp"
#include "ivxlab/core.hpp"
#include "ivxlab/estimators.hpp"
#include "ivxlab/parallel.hpp"
#include "ivxlab/random.hpp"

#include <complex>

namespace ivxlab {

struct BiasCorrection {
  Matrix R;             ///< corrected matrix, or the OLS estimate when skipped
  Matrix R_ols;
  bool skipped = false; ///< an eigenvalue of R_ols was too close to the unit circle
  double shrink = 1.0;  ///< fraction of the correction kept to stay stationary
};

inline double spectral_radius(const Matrix& A) {
  Eigen::EigenSolver<Matrix> es(A, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// R + Sigma [(I - R')^{-1} + R'(I - R'^2)^{-1} + sum_j l_j (I - l_j R')^{-1}] Sxx^{-1},
/// with l_j the eigenvalues of R'. Sigma is the innovation covariance and Sxx
/// the sum of demeaned lagged outer products.
inline BiasCorrection bias_corrected_formula(const Matrix& R, const Matrix& Sigma, const Matrix& Sxx) {
  const Index p = R.rows();
  BiasCorrection out;
  out.R_ols = R;
  out.R = R;
  const Matrix Rt = R.transpose();
  Eigen::EigenSolver<Matrix> es(Rt, false);
  const Eigen::VectorXcd lambda = es.eigenvalues();
  for (Index j = 0; j < p; ++j) {
    if (std::abs(lambda(j)) >= 1.0 - 1e-6) {
      out.skipped = true;
      return out;
    }
  }
  using CMatrix = Eigen::MatrixXcd;
  const Matrix I = Matrix::Identity(p, p);
  CMatrix bracket = ((I - Rt).inverse() + Rt * (I - Rt * Rt).inverse()).cast<std::complex<double>>();
  const CMatrix Rtc = Rt.cast<std::complex<double>>();
  const CMatrix Ic = CMatrix::Identity(p, p);
  for (Index j = 0; j < p; ++j) bracket += lambda(j) * (Ic - lambda(j) * Rtc).inverse();
  const Inverse sxx = robust_inverse(Sxx);
  const Matrix delta = Sigma * bracket.real() * sxx.value;
  // A corrected matrix on or outside the unit circle would make every
  // bootstrap path explode; scale the correction down in 1% steps instead.
  for (int k = 0; k <= 100; ++k) {
    const double f = 1.0 - 0.01 * k;
    out.R = R + f * delta;
    out.shrink = f;
    if (spectral_radius(out.R) < 1.0) return out;
  }
  return out;
}

/// Bias-corrected first-order autoregression of the sample's regressors.
inline BiasCorrection bias_corrected_autoregression(const Sample& sample) {
  const AutoregressionFit ar = autoregression_fit(sample.X(), sample.full(), true);
  return bias_corrected_formula(ar.R, ar.Sigma, ar.Sxx);
}

enum class Multiplier { normal, rademacher };

inline Multiplier multiplier_from_string(const std::string& s) {
  if (s == "normal") return Multiplier::normal;
  if (s == "rademacher") return Multiplier::rademacher;
  throw std::invalid_argument("unknown multiplier '" + s + "' (expected normal|rademacher)");
}

/// Fitted pieces from which bootstrap samples are rebuilt.
struct BootstrapModel {
  double mu_y = 0.0;
  Vector beta;         ///< null-imposed slope
  Vector u;            ///< residuals of the null fit, one per observation
  Vector mu_x;
  Matrix R;            ///< autoregression used for x*
  Matrix v;            ///< autoregression residuals, rows 1..T-1 of X
  Vector x0;
  Intercept intercept = Intercept::stable;
  bool correction_skipped = false;
};

enum class NullModel {
  no_break,        ///< full-sample OLS fit
  no_predictability, ///< intercept only, beta = 0
};

inline NullModel null_model_for(StatisticKind kind) {
  return kind == StatisticKind::joint_beta || kind == StatisticKind::joint_alpha_beta || kind == StatisticKind::wald_ivx
             ? NullModel::no_predictability
             : NullModel::no_break;
}

inline BootstrapModel fit_bootstrap_model(const Sample& sample, NullModel null, bool bias_correct = true) {
  BootstrapModel m;
  const Index p = sample.p();
  m.intercept = sample.intercept();
  if (null == NullModel::no_break) {
    const FitResult ols = ols_fit(sample, sample.full());
    m.mu_y = ols.alpha.value_or(0.0);
    m.beta = ols.beta;
    m.u = ols.residuals;
  } else {
    m.beta = Vector::Zero(p);
    m.mu_y = sample.has_intercept() ? sample.y().mean() : 0.0;
    m.u = sample.y().array() - m.mu_y;
  }
  const AutoregressionFit ar = autoregression_fit(sample.X(), sample.full(), true);
  m.mu_x = ar.mu;
  m.v = ar.residuals;
  m.x0 = sample.X().row(0).transpose();
  if (bias_correct) {
    const BiasCorrection bc = bias_corrected_formula(ar.R, ar.Sigma, ar.Sxx);
    m.R = bc.R;
    m.correction_skipped = bc.skipped;
    // Keep the intercept consistent with the corrected slope at the sample mean.
    if (!bc.skipped) {
      const Index n = sample.T() - 1;
      const Vector lag_mean = sample.X().topRows(n).colwise().mean().transpose();
      const Vector lead_mean = sample.X().bottomRows(n).colwise().mean().transpose();
      m.mu_x = lead_mean - m.R * lag_mean;
    }
  } else {
    m.R = ar.R;
  }
  return m;
}

/// Rebuilds a sample from multipliers e(0..T-1): y row r uses e(r) on u_r and
/// x row r (r >= 1) uses e(r - 1) on its innovation, so the contemporaneous
/// pairing of u and v is preserved.
inline Sample regenerate_sample(const BootstrapModel& m, const Vector& e) {
  const Index T = m.u.size();
  const Index p = m.beta.size();
  if (e.size() != T) throw std::invalid_argument("regenerate_sample: need one multiplier per observation");
  Matrix X(T, p);
  X.row(0) = m.x0.transpose();
  for (Index r = 1; r < T; ++r)
    X.row(r) = (m.mu_x + m.R * X.row(r - 1).transpose() + e(r - 1) * m.v.row(r - 1).transpose()).transpose();
  Vector y(T);
  for (Index r = 0; r < T; ++r) y(r) = m.mu_y + X.row(r).dot(m.beta) + e(r) * m.u(r);
  return Sample(std::move(y), std::move(X), m.intercept);
}

inline Vector draw_multipliers(Index T, Multiplier kind, std::uint64_t seed) {
  Vector e(T);
  NormalStream normal(seed);
  if (kind == Multiplier::normal) {
    for (Index t = 0; t < T; ++t) e(t) = normal();
  } else {
    std::bernoulli_distribution coin(0.5);
    for (Index t = 0; t < T; ++t) e(t) = coin(normal.engine()) ? 1.0 : -1.0;
  }
  return e;
}

struct BootstrapOptions {
  Index draws = 399;
  std::vector<double> alphas{0.05};
  std::uint64_t seed = 0;
  Multiplier multiplier = Multiplier::normal;
  bool bias_correct = true;
};

/// Empirical (1 - alpha) quantiles of the statistic over bootstrap draws.
/// Draws whose statistic fails are discarded; more than 5% discarded is an error.
inline CriticalValueTable wild_bootstrap_critical_value(const Sample& sample, StatisticKind kind, const BreakWindow& window,
                                                       const IvxConfig& config, const BootstrapOptions& opt) {
  if (opt.draws < 99) throw std::invalid_argument("wild_bootstrap_critical_value: need at least 99 draws");
  const BootstrapModel model = fit_bootstrap_model(sample, null_model_for(kind), opt.bias_correct);
  const Index B = opt.draws;
  std::vector<double> stats(static_cast<std::size_t>(B), 0.0);
  std::vector<char> ok(static_cast<std::size_t>(B), 0);
  parallel_for(B, [&](long b) {
    try {
      const Vector e = draw_multipliers(sample.T(), opt.multiplier, derive_seed(opt.seed, {static_cast<std::uint64_t>(b)}));
      const Sample s = regenerate_sample(model, e);
      const double v = compute_statistic(kind, s, window, config).value;
      if (std::isfinite(v)) {
        stats[b] = v;
        ok[b] = 1;
      }
    } catch (const std::exception&) {
    }
  });
  std::vector<double> kept;
  kept.reserve(stats.size());
  for (Index b = 0; b < B; ++b)
    if (ok[b]) kept.push_back(stats[b]);
  const Index discarded = B - static_cast<Index>(kept.size());
  if (20 * discarded > B) {
    std::ostringstream os;
    os << "wild_bootstrap_critical_value: " << discarded << " of " << B << " draws failed (limit 5%)";
    throw NumericalError(os.str());
  }
  CriticalValueTable t;
  t.statistic = to_string(kind);
  t.p = sample.p();
  t.pi1 = window.pi1;
  t.pi2 = window.pi2;
  t.replications = static_cast<Index>(kept.size());
  t.seed = opt.seed;
  t.method = CvMethod::bootstrap;
  t.discarded = discarded;
  t.flagged = model.correction_skipped ? 1 : 0;
  t.quantiles = CriticalValueTable::quantiles_from(std::move(kept), opt.alphas);
  return t;
}

}  // namespace ivxlab
