#pragma once

/// @file
/// Wald statistics: full-sample IVX predictability test, sup OLS-Wald and
/// sup IVX-Wald break tests for slope and intercept, and the joint tests.
///
/// A candidate break t splits the sample into regime one, observations
/// [0, t), and regime two, observations [t, T).

#include "ivxlab/core.hpp"
#include "ivxlab/estimators.hpp"
#include "ivxlab/linalg.hpp"
#include "ivxlab/longrun.hpp"
#include "ivxlab/parallel.hpp"

#include <limits>
#include <string>

namespace ivxlab {

enum class StatisticKind { wald_ivx, sup_wald_ols, sup_wald_ivx_beta, sup_wald_ivx_alpha, joint_beta, joint_alpha_beta };

inline std::string to_string(StatisticKind k) {
  switch (k) {
    case StatisticKind::wald_ivx: return "wald-ivx";
    case StatisticKind::sup_wald_ols: return "sup-ols";
    case StatisticKind::sup_wald_ivx_beta: return "sup-ivx-beta";
    case StatisticKind::sup_wald_ivx_alpha: return "sup-ivx-alpha";
    case StatisticKind::joint_beta: return "joint-beta";
    case StatisticKind::joint_alpha_beta: return "joint-alpha-beta";
  }
  return "unknown";
}

inline StatisticKind statistic_from_string(const std::string& s) {
  for (auto k : {StatisticKind::wald_ivx, StatisticKind::sup_wald_ols, StatisticKind::sup_wald_ivx_beta,
                 StatisticKind::sup_wald_ivx_alpha, StatisticKind::joint_beta, StatisticKind::joint_alpha_beta})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown statistic '" + s +
                              "' (expected wald-ivx|sup-ols|sup-ivx-beta|sup-ivx-alpha|joint-beta|joint-alpha-beta)");
}

inline bool is_sup_statistic(StatisticKind k) { return k != StatisticKind::wald_ivx; }

/// Smallest regime the break tests accept.
inline Index min_regime_size(Index p) { return p + 2; }

/// Full-sample IVX fit with its long-run inputs.
inline FitResult ivx_full_fit(const Sample& sample, const IvxConfig& config) {
  const InstrumentSet z = build_instruments(sample.X(), config, sample.T());
  const LongRunEstimates lr = regime_long_run(sample, sample.full(), config);
  return ivx_fit(sample, z, sample.full(), lr, config);
}

/// (R b - r0)' [R Q R']^{-1} (R b - r0) for the full-sample IVX estimate.
inline double wald_ivx_full(const Sample& sample, const IvxConfig& config, const Matrix& restriction, const Vector& r0) {
  const Index p = sample.p();
  if (restriction.cols() != p || restriction.rows() < 1 || restriction.rows() > p || r0.size() != restriction.rows())
    throw std::invalid_argument("wald_ivx_full: restriction must be q x p with q <= p and r0 of length q");
  const FitResult fit = ivx_full_fit(sample, config);
  const Vector d = restriction * fit.beta - r0;
  if (d.isZero(0.0)) return 0.0;
  const Matrix V = restriction * fit.cov_beta * restriction.transpose();
  const Inverse inv = robust_inverse(V);
  if (inv.pseudo) {
    std::ostringstream os;
    os << "wald_ivx_full: R Q R' is singular for restriction R =\n" << restriction;
    throw NumericalError(os.str());
  }
  return std::max(0.0, d.dot(inv.value * d));
}

/// Predictability test of beta = 0.
inline double wald_ivx_full(const Sample& sample, const IvxConfig& config) {
  return wald_ivx_full(sample, config, Matrix::Identity(sample.p(), sample.p()), Vector::Zero(sample.p()));
}

/// Chow-type OLS statistic at every candidate break. With an intercept the
/// stable policy compares (alpha, beta) across regimes and the unstable policy
/// compares slopes only. sigma2 is SSR pooled over both regimes over T - 2k.
inline WaldScan sup_wald_ols(const Sample& sample, const BreakWindow& window) {
  const Index T = sample.T();
  const Index p = sample.p();
  const bool intercept = sample.has_intercept();
  const Index k = p + (intercept ? 1 : 0);
  const Index first_tested = sample.intercept() == Intercept::unstable ? 1 : 0;
  const Index q = k - first_tested;
  const std::vector<Index> grid = window.grid(T, min_regime_size(p));

  Matrix D(T, k);
  if (intercept) {
    D.col(0).setOnes();
    D.rightCols(p) = sample.X();
  } else {
    D = sample.X();
  }
  const Vector& y = sample.y();
  const Matrix S_all = D.transpose() * D;
  const Vector s_all = D.transpose() * y;
  const double yy_all = y.squaredNorm();

  Matrix S1 = Matrix::Zero(k, k);
  Vector s1 = Vector::Zero(k);
  double yy1 = 0.0;
  Index filled = 0;
  std::vector<double> values;
  std::vector<Index> flagged;
  values.reserve(grid.size());
  const double dof = static_cast<double>(std::max<Index>(T - 2 * k, 1));
  for (Index t : grid) {
    for (; filled < t; ++filled) {
      S1.noalias() += D.row(filled).transpose() * D.row(filled);
      s1.noalias() += D.row(filled).transpose() * y(filled);
      yy1 += y(filled) * y(filled);
    }
    const Matrix S2 = S_all - S1;
    const Vector s2 = s_all - s1;
    const Inverse inv1 = robust_inverse(S1);
    const Inverse inv2 = robust_inverse(S2);
    const Vector th1 = inv1.value * s1;
    const Vector th2 = inv2.value * s2;
    // The moment identity SSR = y'y - s'theta loses all precision when the
    // residuals are tiny next to y'y (explosive regressors, exact fits).
    auto ssr_of = [&](double yy, const Vector& s, const Vector& th, Index b, Index e) {
      const double fast = yy - s.dot(th);
      if (fast > 1e-6 * yy) return fast;
      return (y.segment(b, e - b) - D.middleRows(b, e - b) * th).squaredNorm();
    };
    const double ssr = ssr_of(yy1, s1, th1, 0, t) + ssr_of(yy_all - yy1, s2, th2, t, T);
    const double sigma2 = ssr / dof;
    const Vector d = (th1 - th2).segment(first_tested, q);
    const Matrix V = (inv1.value + inv2.value).block(first_tested, first_tested, q, q);
    const QuadraticForm qf = quadratic_form_inverse(d, V);
    double w = 0.0;
    if (qf.value > 0.0) w = sigma2 > 0.0 ? qf.value / sigma2 : std::numeric_limits<double>::infinity();
    values.push_back(w);
    if (inv1.pseudo || inv2.pseudo || qf.pseudo) flagged.push_back(t);
  }
  return WaldScan::from_values(grid, std::move(values), std::move(flagged));
}

/// Per-candidate IVX break statistics for the slope and, when the sample has
/// an intercept, for the IVZ intercept.
struct IvxBreakScan {
  std::vector<Index> grid;
  std::vector<double> w_beta;
  std::vector<double> w_alpha;
  std::vector<Index> flagged;
};

namespace detail {

struct RegimeFit {
  FitResult fit;
  double ivz_alpha = 0.0;
  Vector z_mean;
};

inline RegimeFit regime_ivx(const Sample& sample, const InstrumentSet& z, IndexRange r, const IvxConfig& config) {
  RegimeFit out;
  LongRunEstimates lr;
  if (config.fm_covariance) {
    lr = regime_long_run(sample, r, config);
  } else {
    // The sandwich form is rescaled by a pooled variance after both regimes are fit.
    lr.Sigma_uu = 1.0;
    lr.Omega_FM = 0.0;
    lr.Delta_uv = config.bias_correct ? regime_long_run(sample, r, config).Delta_uv : Vector::Zero(sample.p());
  }
  out.fit = ivx_fit(sample, z, r, lr, config);
  out.z_mean = z.rows(r).colwise().mean().transpose();
  out.ivz_alpha = sample.y().segment(r.begin, r.size()).mean() - out.fit.beta.dot(out.z_mean);
  return out;
}

struct PairStatistics {
  double w_beta = 0.0;
  double w_alpha = 0.0;
  bool pseudo = false;
};

/// Both regimes fitted at candidate t, and the slope and intercept statistics.
inline PairStatistics regime_pair(const Sample& sample, const InstrumentSet& z_full, Index t, const IvxConfig& config,
                                  bool with_alpha) {
  const Index T = sample.T();
  const Index k = sample.p() + (sample.has_intercept() ? 1 : 0);
  const IndexRange r1{0, t};
  const IndexRange r2{t, T};
  const RegimeFit f1 = regime_ivx(sample, z_full, r1, config);
  const RegimeFit f2 = config.restart_regime_instruments
                           ? regime_ivx(sample, build_instruments(sample.X().middleRows(t, T - t), config, T, t), r2, config)
                           : regime_ivx(sample, z_full, r2, config);
  double scale = 1.0;
  if (!config.fm_covariance) {
    scale = (f1.fit.residuals.squaredNorm() + f2.fit.residuals.squaredNorm()) / static_cast<double>(T);
  }
  const Matrix Q1 = scale * f1.fit.cov_beta;
  const Matrix Q2 = scale * f2.fit.cov_beta;
  PairStatistics out;
  QuadraticForm qb;
  if (!config.fm_covariance && sample.intercept() == Intercept::stable) {
    // The sandwich form compares (alpha, beta) when the intercept is stable.
    Vector d(k);
    d(0) = *f1.fit.alpha - *f2.fit.alpha;
    d.tail(sample.p()) = f1.fit.beta - f2.fit.beta;
    qb = quadratic_form_inverse(d, scale * (f1.fit.cov_theta + f2.fit.cov_theta));
  } else {
    qb = quadratic_form_inverse(f1.fit.beta - f2.fit.beta, Q1 + Q2);
  }
  out.w_beta = std::max(0.0, qb.value);
  out.pseudo = qb.pseudo || f1.fit.pseudo_inverse || f2.fit.pseudo_inverse;
  if (with_alpha && sample.has_intercept()) {
    const double n1 = static_cast<double>(r1.size());
    const double n2 = static_cast<double>(r2.size());
    const double om = f1.fit.residuals.squaredNorm() / (n1 * n1) + f1.z_mean.dot(Q1 * f1.z_mean) +
                      f2.fit.residuals.squaredNorm() / (n2 * n2) + f2.z_mean.dot(Q2 * f2.z_mean);
    const double da = f1.ivz_alpha - f2.ivz_alpha;
    if (om > 0.0) {
      out.w_alpha = da * da / om;
    } else {
      out.w_alpha = da == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
      out.pseudo = true;
    }
  }
  return out;
}

}  // namespace detail

inline IvxBreakScan ivx_break_scan(const Sample& sample, const BreakWindow& window, const IvxConfig& config,
                                   bool with_alpha) {
  config.validate();
  IvxBreakScan scan;
  scan.grid = window.grid(sample.T(), min_regime_size(sample.p()));
  const Index G = static_cast<Index>(scan.grid.size());
  scan.w_beta.assign(G, 0.0);
  scan.w_alpha.assign(G, 0.0);
  std::vector<char> flag(G, 0);
  const InstrumentSet z_full = build_instruments(sample.X(), config, sample.T());
  parallel_for(G, [&](long g) {
    const detail::PairStatistics s = detail::regime_pair(sample, z_full, scan.grid[g], config, with_alpha);
    scan.w_beta[g] = s.w_beta;
    scan.w_alpha[g] = s.w_alpha;
    flag[g] = s.pseudo ? 1 : 0;
  });
  for (Index g = 0; g < G; ++g)
    if (flag[g]) scan.flagged.push_back(scan.grid[g]);
  return scan;
}

inline WaldScan sup_wald_ivx_beta(const Sample& sample, const BreakWindow& window, const IvxConfig& config) {
  IvxBreakScan s = ivx_break_scan(sample, window, config, false);
  return WaldScan::from_values(std::move(s.grid), std::move(s.w_beta), std::move(s.flagged));
}

inline WaldScan sup_wald_ivx_alpha(const Sample& sample, const BreakWindow& window, const IvxConfig& config) {
  if (!sample.has_intercept()) throw std::invalid_argument("sup_wald_ivx_alpha: the sample has no intercept to test");
  IvxBreakScan s = ivx_break_scan(sample, window, config, true);
  return WaldScan::from_values(std::move(s.grid), std::move(s.w_alpha), std::move(s.flagged));
}

/// Intercept break statistic at a single candidate t.
inline double wald_ivx_alpha(const Sample& sample, Index t, const IvxConfig& config) {
  if (!sample.has_intercept()) throw std::invalid_argument("wald_ivx_alpha: the sample has no intercept to test");
  const Index lo = min_regime_size(sample.p());
  if (t < lo || sample.T() - t < lo) throw std::invalid_argument("wald_ivx_alpha: candidate break leaves a regime too short");
  config.validate();
  const InstrumentSet z_full = build_instruments(sample.X(), config, sample.T());
  return detail::regime_pair(sample, z_full, t, config, true).w_alpha;
}

struct JointResult {
  double value = 0.0;
  double full_sample = 0.0;  ///< W_T^IVX for beta = 0
  WaldScan scan;             ///< the sup component, or the three-term sum per candidate
};

/// W_T^IVX + sup_t W_beta(t).
inline JointResult joint_wald_beta(const Sample& sample, const BreakWindow& window, const IvxConfig& config) {
  JointResult r;
  r.full_sample = wald_ivx_full(sample, config);
  r.scan = sup_wald_ivx_beta(sample, window, config);
  r.value = r.full_sample + r.scan.sup_value;
  return r;
}

/// sup_t {W_T^IVX + W_alpha(t) + W_beta(t)}. Without an intercept the alpha
/// term drops out.
inline JointResult joint_wald_alpha_beta(const Sample& sample, const BreakWindow& window, const IvxConfig& config) {
  JointResult r;
  r.full_sample = wald_ivx_full(sample, config);
  IvxBreakScan s = ivx_break_scan(sample, window, config, true);
  std::vector<double> total(s.grid.size());
  for (std::size_t g = 0; g < total.size(); ++g) total[g] = r.full_sample + s.w_alpha[g] + s.w_beta[g];
  r.scan = WaldScan::from_values(std::move(s.grid), std::move(total), std::move(s.flagged));
  r.value = r.scan.sup_value;
  return r;
}

struct StatisticValue {
  double value = 0.0;
  std::optional<WaldScan> scan;
};

inline StatisticValue compute_statistic(StatisticKind kind, const Sample& sample, const BreakWindow& window,
                                        const IvxConfig& config) {
  StatisticValue out;
  switch (kind) {
    case StatisticKind::wald_ivx:
      out.value = wald_ivx_full(sample, config);
      break;
    case StatisticKind::sup_wald_ols:
      out.scan = sup_wald_ols(sample, window);
      out.value = out.scan->sup_value;
      break;
    case StatisticKind::sup_wald_ivx_beta:
      out.scan = sup_wald_ivx_beta(sample, window, config);
      out.value = out.scan->sup_value;
      break;
    case StatisticKind::sup_wald_ivx_alpha:
      out.scan = sup_wald_ivx_alpha(sample, window, config);
      out.value = out.scan->sup_value;
      break;
    case StatisticKind::joint_beta: {
      JointResult j = joint_wald_beta(sample, window, config);
      out.value = j.value;
      out.scan = std::move(j.scan);
      break;
    }
    case StatisticKind::joint_alpha_beta: {
      JointResult j = joint_wald_alpha_beta(sample, window, config);
      out.value = j.value;
      out.scan = std::move(j.scan);
      break;
    }
  }
  return out;
}

struct TestReport {
  StatisticKind kind = StatisticKind::wald_ivx;
  double value = 0.0;
  std::optional<WaldScan> scan;
  double critical_value = 0.0;
  double alpha = 0.05;
  bool reject = false;
  std::optional<double> break_fraction;
};

inline TestReport run_test(StatisticKind kind, const Sample& sample, const BreakWindow& window, const IvxConfig& config,
                           double critical_value, double alpha) {
  StatisticValue v = compute_statistic(kind, sample, window, config);
  TestReport r;
  r.kind = kind;
  r.value = v.value;
  r.critical_value = critical_value;
  r.alpha = alpha;
  r.reject = v.value > critical_value;
  if (v.scan) r.break_fraction = v.scan->argmax_fraction(sample.T());
  r.scan = std::move(v.scan);
  return r;
}

}  // namespace ivxlab
