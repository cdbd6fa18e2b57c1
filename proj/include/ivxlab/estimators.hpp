#pragma once

/// @file
/// OLS and IVX estimation of a predictive regression on a sub-sample.
///
/// IVX instruments follow z_t = R_z z_{t-1} + (x_t - x_{t-1}) with z_0 = 0
/// and R_z = 1 - c_z / T^delta_z. Row r of an InstrumentSet pairs with row r
/// of the sample, i.e. with y_{r+1}.

#include "ivxlab/core.hpp"
#include "ivxlab/linalg.hpp"
#include "ivxlab/longrun.hpp"

namespace ivxlab {

struct InstrumentSet {
  Matrix Z;
  double c_z = 1.0;
  double delta_z = 0.95;
  double rz = 1.0;     ///< common diagonal value of R_z
  Index origin = 0;    ///< sample row of Z.row(0)

  [[nodiscard]] bool covers(IndexRange r) const { return r.begin >= origin && r.end <= origin + Z.rows(); }
  [[nodiscard]] auto rows(IndexRange r) const { return Z.middleRows(r.begin - origin, r.size()); }
};

/// Instruments for the rows of X. `rate_T` is the sample size used in
/// R_z (defaults to X.rows()); `origin` records where X starts in the sample.
inline InstrumentSet build_instruments(const Matrix& X, const IvxConfig& config, Index rate_T = -1, Index origin = 0) {
  config.validate();
  const Index n = X.rows();
  if (n < 2) throw std::invalid_argument("build_instruments: need at least two regressor rows");
  if (rate_T < 0) rate_T = n;
  InstrumentSet out;
  out.c_z = config.c_z;
  out.delta_z = config.delta_z;
  out.rz = 1.0 - config.c_z / std::pow(static_cast<double>(rate_T), config.delta_z);
  out.origin = origin;
  out.Z.resize(n, X.cols());
  out.Z.row(0).setZero();
  for (Index r = 1; r < n; ++r) out.Z.row(r) = out.rz * out.Z.row(r - 1) + (X.row(r) - X.row(r - 1));
  return out;
}

namespace detail {

inline void check_range(const Sample& s, IndexRange r, Index min_size, const char* who) {
  if (r.begin < 0 || r.end > s.T() || r.size() < min_size) {
    std::ostringstream os;
    os << who << ": range [" << r.begin << ", " << r.end << ") must hold at least " << min_size
       << " observations inside the sample";
    throw std::invalid_argument(os.str());
  }
}

inline Matrix design(const Sample& s, IndexRange r) {
  const Index n = r.size();
  const Index p = s.p();
  if (!s.has_intercept()) return s.X().middleRows(r.begin, n);
  Matrix D(n, p + 1);
  D.col(0).setOnes();
  D.rightCols(p) = s.X().middleRows(r.begin, n);
  return D;
}

}  // namespace detail

/// Least squares on observations in `range`, with an intercept column unless
/// the sample's policy is Intercept::none. sigma2 = SSR / (n - k).
inline FitResult ols_fit(const Sample& sample, IndexRange range) {
  const Index p = sample.p();
  const Index k = p + (sample.has_intercept() ? 1 : 0);
  detail::check_range(sample, range, p + 2, "ols_fit");
  const Matrix D = detail::design(sample, range);
  const Vector y = sample.y().segment(range.begin, range.size());
  const Inverse inv = robust_inverse(D.transpose() * D);
  const Vector theta = inv.value * (D.transpose() * y);

  FitResult fit;
  fit.method = Method::OLS;
  fit.pseudo_inverse = inv.pseudo;
  fit.residuals = y - D * theta;
  const Index dof = std::max<Index>(range.size() - k, 1);
  fit.sigma2 = fit.residuals.squaredNorm() / static_cast<double>(dof);
  if (sample.has_intercept()) {
    fit.alpha = theta(0);
    fit.beta = theta.tail(p);
  } else {
    fit.beta = theta;
  }
  fit.cov_theta = fit.sigma2 * inv.value;
  fit.cov_beta = fit.cov_theta.bottomRightCorner(p, p);
  return fit;
}

/// First-order autoregression of the regressors, x_r = mu + R x_{r-1} + v_r,
/// fitted on rows of `range` (so range.size() - 1 residual rows).
struct AutoregressionFit {
  Matrix R;
  Vector mu;
  Matrix residuals;
  Matrix Sxx;    ///< sum of demeaned lagged outer products
  Matrix Sigma;  ///< residual covariance, divided by the number of residual rows
  bool pseudo_inverse = false;
};

inline AutoregressionFit autoregression_fit(const Matrix& X, IndexRange range, bool intercept) {
  const Index n = range.size() - 1;
  const Index p = X.cols();
  if (n < p + 1) throw std::invalid_argument("autoregression_fit: range too short");
  const Matrix lag = X.middleRows(range.begin, n);
  const Matrix lead = X.middleRows(range.begin + 1, n);
  AutoregressionFit fit;
  Matrix lagc = lag;
  Matrix leadc = lead;
  Vector lag_mean = Vector::Zero(p);
  Vector lead_mean = Vector::Zero(p);
  if (intercept) {
    lag_mean = lag.colwise().mean().transpose();
    lead_mean = lead.colwise().mean().transpose();
    lagc.rowwise() -= lag_mean.transpose();
    leadc.rowwise() -= lead_mean.transpose();
  }
  fit.Sxx = lagc.transpose() * lagc;
  const Inverse inv = robust_inverse(fit.Sxx);
  fit.pseudo_inverse = inv.pseudo;
  fit.R = (leadc.transpose() * lagc) * inv.value;
  fit.mu = lead_mean - fit.R * lag_mean;
  fit.residuals = leadc - lagc * fit.R.transpose();
  fit.Sigma = fit.residuals.transpose() * fit.residuals / static_cast<double>(n);
  return fit;
}

/// Long-run quantities for the IVX covariance of a regime: u from the OLS fit
/// of the predictive regression, v from the regressor autoregression, paired
/// contemporaneously (u_t with v_t).
inline LongRunEstimates regime_long_run(const Sample& sample, IndexRange range, const IvxConfig& config) {
  const FitResult ols = ols_fit(sample, range);
  const AutoregressionFit ar = autoregression_fit(sample.X(), range, sample.has_intercept());
  const Index n = range.size();
  const Vector u_pair = ols.residuals.head(n - 1);
  return estimate_long_run(ols.residuals, u_pair, ar.residuals, config.bandwidth(n));
}

/// IVX estimate on `range`. With an intercept the regression is demeaned over
/// the range. Covariance is the fully modified form when config.fm_covariance,
/// else the sandwich (Z'X)^{-1} Z'Z (X'Z)^{-1} lr.Sigma_uu, where with an
/// intercept Z and X carry a column of ones and cov_theta covers (alpha, beta).
inline FitResult ivx_fit(const Sample& sample, const InstrumentSet& instruments, IndexRange range,
                         const LongRunEstimates& lr, const IvxConfig& config) {
  const Index p = sample.p();
  detail::check_range(sample, range, p + 2, "ivx_fit");
  if (!instruments.covers(range)) throw std::invalid_argument("ivx_fit: instruments do not cover the range");
  const Index n = range.size();
  const auto Z = instruments.rows(range);
  Matrix Xd = sample.X().middleRows(range.begin, n);
  Vector yd = sample.y().segment(range.begin, n);
  Vector x_mean = Vector::Zero(p);
  double y_mean = 0.0;
  if (sample.has_intercept()) {
    x_mean = Xd.colwise().mean().transpose();
    y_mean = yd.mean();
    Xd.rowwise() -= x_mean.transpose();
    yd.array() -= y_mean;
  }
  const Matrix ZX = Z.transpose() * Xd;
  Vector num = Z.transpose() * yd;
  if (config.bias_correct) num -= static_cast<double>(n) * lr.Delta_uv;
  const Inverse inv = robust_inverse(ZX);

  FitResult fit;
  fit.method = config.bias_correct ? Method::IVX_BC : Method::IVX;
  fit.pseudo_inverse = inv.pseudo;
  fit.beta = inv.value * num;
  fit.residuals = yd - Xd * fit.beta;
  if (sample.has_intercept()) fit.alpha = y_mean - x_mean.dot(fit.beta);
  fit.sigma2 = lr.Sigma_uu;

  if (!config.fm_covariance && sample.has_intercept()) {
    // Sandwich of the IV regression with instruments [1, z] for [1, x]; its
    // slope coincides with the demeaned estimate above.
    Matrix Za(n, p + 1);
    Za.col(0).setOnes();
    Za.rightCols(p) = Z;
    const Inverse ia = robust_inverse(Za.transpose() * detail::design(sample, range));
    fit.cov_theta = lr.Sigma_uu * ia.value * (Za.transpose() * Za) * ia.value.transpose();
    fit.cov_beta = fit.cov_theta.bottomRightCorner(p, p);
    fit.pseudo_inverse = fit.pseudo_inverse || ia.pseudo;
    return fit;
  }
  Matrix M = lr.Sigma_uu * (Z.transpose() * Z);
  if (config.fm_covariance && sample.has_intercept()) {
    const Vector z_mean = Z.colwise().mean().transpose();
    M -= static_cast<double>(n) * lr.Omega_FM * (z_mean * z_mean.transpose());
  }
  fit.cov_beta = inv.value * M * inv.value.transpose();
  return fit;
}

/// Intercept implied by a slope estimate and the instrument mean: ybar - beta' zbar.
inline double ivz_intercept(const Sample& sample, const Vector& beta, const InstrumentSet& instruments, IndexRange range) {
  if (!instruments.covers(range) || range.size() < 1) throw std::invalid_argument("ivz_intercept: bad range");
  const double y_mean = sample.y().segment(range.begin, range.size()).mean();
  const Vector z_mean = instruments.rows(range).colwise().mean().transpose();
  return y_mean - beta.dot(z_mean);
}

/// 1 - SSR / sum (y - ybar)^2 over the range.
inline double r_squared(const Sample& sample, IndexRange range, const FitResult& fit) {
  const Vector y = sample.y().segment(range.begin, range.size());
  const double sst = (y.array() - y.mean()).square().sum();
  return sst > 0.0 ? 1.0 - fit.residuals.squaredNorm() / sst : 0.0;
}

/// Newey-West (Bartlett) covariance of the OLS coefficients, including the
/// intercept when present. Scores are d_t u_t; m is the lag truncation.
inline Matrix ols_hac_covariance(const Sample& sample, IndexRange range, const FitResult& fit, Index m) {
  const Matrix D = detail::design(sample, range);
  const Matrix scores = D.array().colwise() * fit.residuals.array();
  const double n = static_cast<double>(range.size());
  const Matrix S = n * bartlett_lrvar(scores, std::min<Index>(m, range.size() - 1));
  const Inverse inv = robust_inverse(D.transpose() * D);
  return inv.value * S * inv.value;
}

}  // namespace ivxlab
