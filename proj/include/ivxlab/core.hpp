#pragma once

/// @file
/// Value types shared across the library: samples, persistence and
/// innovation specifications, tuning knobs, fit results and scans.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ivxlab {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a computation cannot produce a meaningful number
/// (singular systems that cannot be pseudo-inverted, non-PD covariances).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Intercept { none, stable, unstable };

inline std::string to_string(Intercept policy) {
  switch (policy) {
    case Intercept::none: return "none";
    case Intercept::stable: return "stable";
    case Intercept::unstable: return "unstable";
  }
  return "unknown";
}

inline Intercept intercept_from_string(const std::string& s) {
  if (s == "none") return Intercept::none;
  if (s == "stable") return Intercept::stable;
  if (s == "unstable") return Intercept::unstable;
  throw std::invalid_argument("unknown intercept policy '" + s + "' (expected none|stable|unstable)");
}

/// Half-open observation interval [begin, end) in sample row coordinates.
struct IndexRange {
  Index begin = 0;
  Index end = 0;

  [[nodiscard]] Index size() const { return end - begin; }
};

/// Dependent series and lagged regressors of a predictive regression.
///
/// Row t of X holds x_{t-1}, the regressor observed one period before y_t.
/// Every estimator in the library reads the sample through this convention.
class Sample {
 public:
  Sample(Vector y, Matrix X, Intercept intercept) : y_(std::move(y)), X_(std::move(X)), intercept_(intercept) {
    if (X_.cols() < 1) throw std::invalid_argument("Sample: regressor matrix needs at least one column");
    if (X_.rows() != y_.size()) {
      std::ostringstream os;
      os << "Sample: y has " << y_.size() << " rows but X has " << X_.rows();
      throw std::invalid_argument(os.str());
    }
    if (y_.size() < min_length(X_.cols())) {
      std::ostringstream os;
      os << "Sample: T = " << y_.size() << " is below the minimum 4(p+1) = " << min_length(X_.cols());
      throw std::invalid_argument(os.str());
    }
    if (!y_.allFinite() || !X_.allFinite()) throw std::invalid_argument("Sample: non-finite entries");
  }

  [[nodiscard]] static Index min_length(Index p) { return 4 * (p + 1); }

  [[nodiscard]] const Vector& y() const { return y_; }
  [[nodiscard]] const Matrix& X() const { return X_; }
  [[nodiscard]] Intercept intercept() const { return intercept_; }
  [[nodiscard]] Index T() const { return y_.size(); }
  [[nodiscard]] Index p() const { return X_.cols(); }
  [[nodiscard]] bool has_intercept() const { return intercept_ != Intercept::none; }
  [[nodiscard]] IndexRange full() const { return {0, T()}; }

  [[nodiscard]] Sample with_y(Vector y) const { return Sample(std::move(y), X_, intercept_); }

  friend bool operator==(const Sample& a, const Sample& b) {
    return a.intercept_ == b.intercept_ && a.y_.size() == b.y_.size() && a.X_.rows() == b.X_.rows() &&
           a.X_.cols() == b.X_.cols() && a.y_ == b.y_ && a.X_ == b.X_;
  }

 private:
  Vector y_;
  Matrix X_;
  Intercept intercept_;
};

/// Diagonal local-to-unity coefficients and the exponent of R_T = I - C / T^gamma_x.
struct PersistenceSpec {
  Vector c;
  double gamma_x = 1.0;

  PersistenceSpec() = default;
  PersistenceSpec(Vector c_in, double gamma) : c(std::move(c_in)), gamma_x(gamma) { validate(); }

  void validate() const {
    if (c.size() < 1) throw std::invalid_argument("PersistenceSpec: empty c");
    if (!c.allFinite()) throw std::invalid_argument("PersistenceSpec: non-finite c");
    if (!std::isfinite(gamma_x) || gamma_x < 0.0) throw std::invalid_argument("PersistenceSpec: gamma_x must be finite and >= 0");
  }

  [[nodiscard]] Index p() const { return c.size(); }

  /// Diagonal of R_T for sample size T.
  [[nodiscard]] Vector autoregressive_diagonal(Index T) const {
    const double scale = std::pow(static_cast<double>(T), gamma_x);
    return (Vector::Ones(c.size()) - c / scale);
  }
};

/// Contemporaneous covariance of (u_t, v_t')'.
class InnovationCov {
 public:
  InnovationCov(double sigma_uu, Vector sigma_uv, Matrix Sigma_vv)
      : sigma_uu_(sigma_uu), sigma_uv_(std::move(sigma_uv)), Sigma_vv_(std::move(Sigma_vv)) {
    const Index p = sigma_uv_.size();
    if (p < 1 || Sigma_vv_.rows() != p || Sigma_vv_.cols() != p)
      throw std::invalid_argument("InnovationCov: inconsistent dimensions");
    check_positive_definite(assemble());
  }

  /// Full (p+1)x(p+1) matrix; validated on construction.
  static InnovationCov from_matrix(const Matrix& S) {
    if (S.rows() != S.cols() || S.rows() < 2) throw std::invalid_argument("InnovationCov: need a square matrix of size >= 2");
    const Index p = S.rows() - 1;
    if ((S - S.transpose()).cwiseAbs().maxCoeff() > 0.0) throw std::invalid_argument("InnovationCov: matrix is not symmetric");
    return InnovationCov(S(0, 0), S.block(1, 0, p, 1), S.block(1, 1, p, p));
  }

  /// Bivariate covariance with variances (var_u, var_v) and correlation rho.
  static InnovationCov bivariate(double var_u, double var_v, double rho) {
    Vector s(1);
    s(0) = rho * std::sqrt(var_u * var_v);
    Matrix v(1, 1);
    v(0, 0) = var_v;
    return InnovationCov(var_u, s, v);
  }

  [[nodiscard]] Matrix assemble() const {
    const Index p = sigma_uv_.size();
    Matrix S(p + 1, p + 1);
    S(0, 0) = sigma_uu_;
    S.block(1, 0, p, 1) = sigma_uv_;
    S.block(0, 1, 1, p) = sigma_uv_.transpose();
    S.block(1, 1, p, p) = Sigma_vv_;
    return S;
  }

  [[nodiscard]] double sigma_uu() const { return sigma_uu_; }
  [[nodiscard]] const Vector& sigma_uv() const { return sigma_uv_; }
  [[nodiscard]] const Matrix& Sigma_vv() const { return Sigma_vv_; }
  [[nodiscard]] Index p() const { return sigma_uv_.size(); }

 private:
  static void check_positive_definite(const Matrix& S) {
    if (!S.allFinite()) throw std::invalid_argument("InnovationCov: non-finite entries");
    if ((S - S.transpose()).cwiseAbs().maxCoeff() > 0.0) throw std::invalid_argument("InnovationCov: not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
    const double smallest = es.eigenvalues().minCoeff();
    const double largest = es.eigenvalues().cwiseAbs().maxCoeff();
    if (!(smallest > 1e-14 * std::max(1.0, largest))) {
      std::ostringstream os;
      os << "InnovationCov: covariance is not positive definite (smallest eigenvalue " << smallest << ")";
      throw std::invalid_argument(os.str());
    }
  }

  double sigma_uu_;
  Vector sigma_uv_;
  Matrix Sigma_vv_;
};

/// Instrument tuning and covariance options for IVX-type estimators.
struct IvxConfig {
  double c_z = 1.0;           ///< common instrument localizing coefficient
  double delta_z = 0.95;      ///< instrument exponent, R_z = 1 - c_z / T^delta_z
  double bandwidth_eta = 1.0; ///< lag truncation m = floor(eta * T^(1/5))
  bool bias_correct = false;
  bool fm_covariance = true;  ///< fully modified covariance; false selects the plain sandwich
  bool restart_regime_instruments = true;

  /// c_z = 0 is accepted as a degenerate setting in which the instrument
  /// equals the differenced-and-summed regressor.
  void validate() const {
    if (!(delta_z > 0.0 && delta_z < 1.0)) throw std::invalid_argument("IvxConfig: delta_z must lie in (0,1)");
    if (!(c_z >= 0.0) || !std::isfinite(c_z)) throw std::invalid_argument("IvxConfig: c_z must be >= 0");
    if (!(bandwidth_eta > 0.0)) throw std::invalid_argument("IvxConfig: bandwidth_eta must be > 0");
  }

  [[nodiscard]] Index bandwidth(Index T) const {
    return static_cast<Index>(std::floor(bandwidth_eta * std::pow(static_cast<double>(T), 0.2)));
  }
};

/// Trimming window for candidate break points.
struct BreakWindow {
  double pi1 = 0.15;
  double pi2 = 0.85;

  void validate() const {
    if (!(pi1 > 0.0 && pi1 < pi2 && pi2 < 1.0)) throw std::invalid_argument("BreakWindow: need 0 < pi1 < pi2 < 1");
  }

  /// Candidate break dates t: regime one is observations [0, t), regime two [t, T).
  /// Every integer in [floor(pi1 T), ceil(pi2 T)] is used.
  [[nodiscard]] std::vector<Index> grid(Index T, Index min_regime) const {
    validate();
    const Index lo = static_cast<Index>(std::floor(pi1 * static_cast<double>(T) + 1e-9));
    const Index hi = static_cast<Index>(std::ceil(pi2 * static_cast<double>(T) - 1e-9));
    if (lo < min_regime || T - hi < min_regime) {
      std::ostringstream os;
      os << "BreakWindow: grid [" << lo << ", " << hi << "] leaves fewer than " << min_regime
         << " observations in a regime for T = " << T;
      throw std::invalid_argument(os.str());
    }
    std::vector<Index> g;
    for (Index t = lo; t <= hi; ++t) g.push_back(t);
    if (g.empty()) throw std::invalid_argument("BreakWindow: empty grid");
    return g;
  }
};

enum class Method { OLS, IVX, IVX_BC };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::OLS: return "OLS";
    case Method::IVX: return "IVX";
    case Method::IVX_BC: return "IVX-BC";
  }
  return "unknown";
}

struct FitResult {
  Vector beta;
  std::optional<double> alpha;
  Vector residuals;  ///< one entry per observation of the fitted range
  Matrix cov_beta;
  Matrix cov_theta;  ///< covariance of (alpha, beta) when the estimator provides it, else empty
  double sigma2 = 0.0;
  Method method = Method::OLS;
  bool pseudo_inverse = false;
};

/// Per-candidate statistics of a sup-type test.
struct WaldScan {
  std::vector<Index> grid;
  std::vector<double> values;
  double sup_value = 0.0;
  Index argmax_index = 0;
  std::vector<Index> flagged;  ///< grid points whose covariance needed a pseudo-inverse

  static WaldScan from_values(std::vector<Index> grid, std::vector<double> values, std::vector<Index> flagged = {}) {
    if (grid.size() != values.size() || grid.empty()) throw std::invalid_argument("WaldScan: grid/value size mismatch");
    WaldScan s;
    s.grid = std::move(grid);
    s.values = std::move(values);
    s.flagged = std::move(flagged);
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.values.size(); ++i)
      if (s.values[i] > s.values[best]) best = i;
    s.sup_value = s.values[best];
    s.argmax_index = s.grid[best];
    return s;
  }

  [[nodiscard]] double argmax_fraction(Index T) const { return static_cast<double>(argmax_index) / static_cast<double>(T); }
};

enum class CvMethod { simulated_limit, bootstrap, fixed };

inline std::string to_string(CvMethod m) {
  switch (m) {
    case CvMethod::simulated_limit: return "simulated-limit";
    case CvMethod::bootstrap: return "bootstrap";
    case CvMethod::fixed: return "fixed";
  }
  return "unknown";
}

/// Empirical quantile with linear interpolation between order statistics
/// (the "type 7" definition). `sorted` must be ascending.
inline double empirical_quantile(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw std::invalid_argument("empirical_quantile: prob outside [0,1]");
  const double h = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Critical values c_alpha for a statistic, keyed by size alpha.
struct CriticalValueTable {
  std::string statistic;
  Index p = 1;
  double pi1 = 0.15;
  double pi2 = 0.85;
  std::vector<std::pair<double, double>> quantiles;  ///< (alpha, c_alpha), ascending alpha
  Index replications = 0;
  std::uint64_t seed = 0;
  CvMethod method = CvMethod::simulated_limit;
  Index discarded = 0;  ///< draws that failed and were dropped
  Index flagged = 0;    ///< draws that needed a pseudo-inverse somewhere on the grid

  /// Builds quantiles from raw draws. Values are nonincreasing in alpha.
  static std::vector<std::pair<double, double>> quantiles_from(std::vector<double> draws, std::vector<double> alphas) {
    std::sort(draws.begin(), draws.end());
    std::sort(alphas.begin(), alphas.end());
    std::vector<std::pair<double, double>> q;
    for (double a : alphas) {
      if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("CriticalValueTable: alpha must lie in (0,1)");
      q.emplace_back(a, empirical_quantile(draws, 1.0 - a));
    }
    return q;
  }

  [[nodiscard]] double at(double alpha) const {
    for (const auto& [a, c] : quantiles)
      if (std::abs(a - alpha) < 1e-12) return c;
    std::ostringstream os;
    os << "CriticalValueTable: no entry for alpha = " << alpha;
    throw std::out_of_range(os.str());
  }

  void validate() const {
    if (replications <= 0) throw std::invalid_argument("CriticalValueTable: replication count must be positive");
    for (std::size_t i = 1; i < quantiles.size(); ++i)
      if (quantiles[i].second > quantiles[i - 1].second)
        throw std::invalid_argument("CriticalValueTable: critical values increase with alpha");
  }
};

}  // namespace ivxlab
