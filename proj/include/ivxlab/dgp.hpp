#pragma once

/// @file
/// Simulation of the predictive system
///
///   y_t = (a1 + b1' x_{t-1}) 1{t <= k} + (a2 + b2' x_{t-1}) 1{t > k} + u_t
///   x_t = (I - C / T^gamma) x_{t-1} + v_t,   (u_t, v_t')' ~ N(0, Sigma_ee)
///
/// with k = floor(pi0 T). Negative c gives explosive regressors through the
/// same recursion.

#include "ivxlab/core.hpp"
#include "ivxlab/random.hpp"

#include <optional>

namespace ivxlab {

struct DgpParams {
  double alpha1 = 0.0;
  Vector beta1;
  double alpha2 = 0.0;
  Vector beta2;
  std::optional<double> break_fraction;
  PersistenceSpec persistence;
  InnovationCov innovations = InnovationCov::bivariate(1.0, 1.0, 0.0);
  Vector x0;  ///< empty means zero
  Intercept intercept = Intercept::stable;

  [[nodiscard]] Index p() const { return beta1.size(); }

  void validate() const {
    const Index p = beta1.size();
    if (p < 1) throw std::invalid_argument("DgpParams: beta1 is empty");
    if (break_fraction) {
      if (beta2.size() != p) throw std::invalid_argument("DgpParams: beta2 must have the length of beta1");
      if (!(*break_fraction > 0.0 && *break_fraction < 1.0))
        throw std::invalid_argument("DgpParams: break fraction must lie in (0,1)");
    }
    persistence.validate();
    if (persistence.p() != p || innovations.p() != p) throw std::invalid_argument("DgpParams: dimension mismatch");
    if (x0.size() != 0 && x0.size() != p) throw std::invalid_argument("DgpParams: x0 has the wrong length");
  }

  /// No-break system with common coefficients.
  static DgpParams stable_system(double alpha, Vector beta, PersistenceSpec persistence, InnovationCov cov,
                                 Intercept intercept) {
    DgpParams d;
    d.alpha1 = d.alpha2 = alpha;
    d.beta1 = beta;
    d.beta2 = std::move(beta);
    d.persistence = std::move(persistence);
    d.innovations = std::move(cov);
    d.intercept = intercept;
    return d;
  }
};

/// T draws of (u_t, v_t')' stacked as rows of a T x (p+1) matrix.
inline Matrix draw_innovations(Index T, const InnovationCov& cov, std::uint64_t seed) {
  if (T < 1) throw std::invalid_argument("draw_innovations: T must be positive");
  const Matrix S = cov.assemble();
  Eigen::LLT<Matrix> llt(S);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
    std::ostringstream os;
    os << "draw_innovations: covariance is not positive definite (smallest eigenvalue "
       << es.eigenvalues().minCoeff() << ")";
    throw NumericalError(os.str());
  }
  const Matrix L = llt.matrixL();
  const Index q = S.rows();
  NormalStream normal(seed);
  Matrix Z(T, q);
  for (Index t = 0; t < T; ++t)
    for (Index j = 0; j < q; ++j) Z(t, j) = normal();
  return Z * L.transpose();
}

/// Returns rows x_0, ..., x_T of x_t = R_T x_{t-1} + v_t.
inline Matrix simulate_lur(Index T, const PersistenceSpec& spec, const Matrix& v, const Vector& x0) {
  spec.validate();
  const Index p = spec.p();
  if (v.rows() != T || v.cols() != p) throw std::invalid_argument("simulate_lur: innovation matrix has the wrong shape");
  if (x0.size() != p) throw std::invalid_argument("simulate_lur: x0 has the wrong length");
  const Vector rho = spec.autoregressive_diagonal(T);
  Matrix x(T + 1, p);
  x.row(0) = x0.transpose();
  for (Index t = 1; t <= T; ++t) x.row(t) = x.row(t - 1).cwiseProduct(rho.transpose()) + v.row(t - 1);
  return x;
}

inline Sample simulate_sample(const DgpParams& params, Index T, std::uint64_t seed) {
  params.validate();
  const Index p = params.p();
  const Matrix e = draw_innovations(T, params.innovations, seed);
  const Vector x0 = params.x0.size() ? params.x0 : Vector::Zero(p);
  const Matrix x = simulate_lur(T, params.persistence, e.rightCols(p), x0);

  const Index k = params.break_fraction ? static_cast<Index>(std::floor(*params.break_fraction * static_cast<double>(T)))
                                        : T;
  Vector y(T);
  for (Index t = 1; t <= T; ++t) {
    const bool first = t <= k;
    const double a = first ? params.alpha1 : params.alpha2;
    const Vector& b = first ? params.beta1 : params.beta2;
    y(t - 1) = a + x.row(t - 1).dot(b) + e(t - 1, 0);
  }
  return Sample(std::move(y), x.topRows(T), params.intercept);
}

}  // namespace ivxlab
