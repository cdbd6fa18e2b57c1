#pragma once

/// @file
/// Bartlett-kernel (Newey-West) long-run covariances and the fully modified
/// quantities that enter IVX covariance matrices.

#include "ivxlab/core.hpp"
#include "ivxlab/linalg.hpp"

namespace ivxlab {

enum class LrMode {
  one_sided,  ///< sum over h = 0..m of w_h Gamma_h
  two_sided,  ///< Gamma_0 plus w_h (Gamma_h(a,b) + Gamma_h(b,a)') for h = 1..m
};

inline double bartlett_weight(Index h, Index m) {
  return 1.0 - static_cast<double>(h) / static_cast<double>(m + 1);
}

/// Lag truncation m = floor(eta * T^(1/5)).
inline Index default_bandwidth(Index T, double eta = 1.0) {
  return static_cast<Index>(std::floor(eta * std::pow(static_cast<double>(T), 0.2)));
}

/// (1/T) sum_h w_h sum_{t>h} a_t b_{t-h}' with Bartlett weights.
inline Matrix bartlett_lrcov(const Matrix& a, const Matrix& b, Index m, LrMode mode = LrMode::one_sided) {
  const Index T = a.rows();
  if (b.rows() != T) throw std::invalid_argument("bartlett_lrcov: inputs have different lengths");
  if (m < 0) throw std::invalid_argument("bartlett_lrcov: negative lag truncation");
  if (m >= T) {
    std::ostringstream os;
    os << "bartlett_lrcov: lag truncation m = " << m << " must be below T = " << T;
    throw std::invalid_argument(os.str());
  }
  const double invT = 1.0 / static_cast<double>(T);
  Matrix out = a.transpose() * b * invT;
  for (Index h = 1; h <= m; ++h) {
    const double w = bartlett_weight(h, m);
    const Matrix gamma = a.bottomRows(T - h).transpose() * b.topRows(T - h) * invT;
    out += w * gamma;
    if (mode == LrMode::two_sided) out += w * (b.bottomRows(T - h).transpose() * a.topRows(T - h) * invT).transpose();
  }
  return out;
}

/// Two-sided long-run variance of a, symmetrized and floored to be PSD.
inline Matrix bartlett_lrvar(const Matrix& a, Index m) {
  Matrix S = bartlett_lrcov(a, a, m, LrMode::two_sided);
  S = 0.5 * (S + S.transpose());
  if (S.rows() == 1) {
    S(0, 0) = std::max(S(0, 0), 0.0);
    return S;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  if (es.eigenvalues().minCoeff() >= 0.0) return S;
  const Vector lambda = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose();
}

/// Components fed into the fully modified correction.
struct LongRunInputs {
  double sigma_uu = 0.0;  ///< short-run variance of u
  Vector omega_uv;        ///< long-run covariance of u with v
  Matrix omega_vv;        ///< long-run variance of v
  Vector delta_uv;        ///< Bartlett sum of u_t v_{t-h} over h = 1..m
};

struct LongRunEstimates {
  double Sigma_uu = 0.0;
  Vector Omega_uv;
  Matrix Omega_vv;
  double Omega_FM = 0.0;  ///< Sigma_uu - Omega_uv' Omega_vv^{-1} Omega_uv, kept within [0, Sigma_uu]
  double rho2_uv = 0.0;   ///< Omega_uv' Omega_vv^{-1} Omega_uv / Sigma_uu, clamped to [0,1]
  Vector Delta_uv;
  bool pseudo_inverse = false;
};

/// Fully modified quantities. The inverse of Omega_vv is taken with a relative
/// singular-value threshold of 1e-12; a singular Omega_vv sets pseudo_inverse.
inline LongRunEstimates fm_correction(const LongRunInputs& in) {
  const Index p = in.omega_uv.size();
  if (in.omega_vv.rows() != p || in.omega_vv.cols() != p) throw std::invalid_argument("fm_correction: dimension mismatch");
  LongRunEstimates out;
  out.Sigma_uu = in.sigma_uu;
  out.Omega_uv = in.omega_uv;
  out.Omega_vv = in.omega_vv;
  out.Delta_uv = in.delta_uv.size() ? in.delta_uv : Vector::Zero(p);
  const Inverse inv = robust_inverse(in.omega_vv);
  out.pseudo_inverse = inv.pseudo;
  const double explained = in.omega_uv.dot(inv.value * in.omega_uv);
  double rho2 = in.sigma_uu > 0.0 ? explained / in.sigma_uu : 0.0;
  if (!std::isfinite(rho2)) rho2 = 0.0;
  out.rho2_uv = std::clamp(rho2, 0.0, 1.0);
  out.Omega_FM = in.sigma_uu * (1.0 - out.rho2_uv);
  return out;
}

/// Long-run estimates from contemporaneously aligned residual series u (n) and
/// v (n x p). Sigma_uu uses all of u_all, which may be longer than u.
inline LongRunEstimates estimate_long_run(const Vector& u_all, const Vector& u, const Matrix& v, Index m) {
  if (u.size() != v.rows()) throw std::invalid_argument("estimate_long_run: residual series have different lengths");
  const Index n = u.size();
  m = std::min(m, n - 1);
  LongRunInputs in;
  in.sigma_uu = u_all.squaredNorm() / static_cast<double>(u_all.size());
  const Matrix um = u;  // n x 1
  in.omega_uv = bartlett_lrcov(um, v, m, LrMode::two_sided).transpose();
  in.omega_vv = bartlett_lrvar(v, m);
  // The lagged instrument only meets past v, so the numerator bias excludes h = 0.
  const Matrix contemporaneous = um.transpose() * v / static_cast<double>(n);
  in.delta_uv = (bartlett_lrcov(um, v, m, LrMode::one_sided) - contemporaneous).transpose();
  return fm_correction(in);
}

}  // namespace ivxlab
