#pragma once

// Brute-force reference implementations for the equivalence tests. Written
// with plain loops over std::vector so they share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // row-major

inline Mat zeros(std::size_t r, std::size_t c) { return Mat(r, Vec(c, 0.0)); }

// Gauss-Jordan inverse with partial pivoting.
inline Mat inverse(Mat a) {
  const std::size_t n = a.size();
  Mat inv = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    if (a[piv][col] == 0.0) throw std::runtime_error("oracle::inverse: singular");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    const double d = a[col][col];
    for (std::size_t j = 0; j < n; ++j) {
      a[col][j] /= d;
      inv[col][j] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

inline double quad_inv(const Vec& d, const Mat& V) {
  const Mat Vi = inverse(V);
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d.size(); ++j) s += d[i] * Vi[i][j] * d[j];
  return s;
}

inline double mean(const Vec& v, std::size_t b, std::size_t e) {
  double s = 0.0;
  for (std::size_t i = b; i < e; ++i) s += v[i];
  return s / static_cast<double>(e - b);
}

struct Ols {
  Vec theta;      // intercept first when present
  Vec residuals;
  double ssr = 0.0;
  Mat inv_dd;     // (D'D)^{-1}
};

// Normal equations on rows [b, e) of y and the columns of X.
inline Ols ols(const Vec& y, const Mat& X, bool intercept, std::size_t b, std::size_t e) {
  const std::size_t p = X[0].size();
  const std::size_t k = p + (intercept ? 1 : 0);
  auto d = [&](std::size_t t, std::size_t j) { return intercept ? (j == 0 ? 1.0 : X[t][j - 1]) : X[t][j]; };
  Mat dd = zeros(k, k);
  Vec dy(k, 0.0);
  for (std::size_t t = b; t < e; ++t)
    for (std::size_t i = 0; i < k; ++i) {
      dy[i] += d(t, i) * y[t];
      for (std::size_t j = 0; j < k; ++j) dd[i][j] += d(t, i) * d(t, j);
    }
  Ols o;
  o.inv_dd = inverse(dd);
  o.theta.assign(k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) o.theta[i] += o.inv_dd[i][j] * dy[j];
  for (std::size_t t = b; t < e; ++t) {
    double fit = 0.0;
    for (std::size_t j = 0; j < k; ++j) fit += d(t, j) * o.theta[j];
    o.residuals.push_back(y[t] - fit);
    o.ssr += (y[t] - fit) * (y[t] - fit);
  }
  return o;
}

// z_r = sum_{j=1}^{r} rz^{r-j} (x_j - x_{j-1}), z_0 = 0, column by column.
inline Mat instruments(const Mat& X, double rz, std::size_t b = 0) {
  const std::size_t n = X.size() - b;
  const std::size_t p = X[0].size();
  Mat Z = zeros(n, p);
  for (std::size_t r = 1; r < n; ++r)
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 1; j <= r; ++j) Z[r][i] += std::pow(rz, static_cast<double>(r - j)) * (X[b + j][i] - X[b + j - 1][i]);
  return Z;
}

inline double bartlett_weight(std::size_t h, std::size_t m) {
  return 1.0 - static_cast<double>(h) / static_cast<double>(m + 1);
}

// (1/T) sum_{h=0}^{m} w_h sum_{t=h+1}^{T} a_t b_{t-h}; the two-sided variant
// adds w_h sum_t b_t a_{t-h} for h >= 1.
inline double bartlett(const Vec& a, const Vec& b, std::size_t m, bool two_sided) {
  const std::size_t T = a.size();
  double s = 0.0;
  for (std::size_t h = 0; h <= m; ++h) {
    double acc = 0.0;
    for (std::size_t t = h; t < T; ++t) acc += a[t] * b[t - h];
    if (two_sided && h > 0)
      for (std::size_t t = h; t < T; ++t) acc += b[t] * a[t - h];
    s += bartlett_weight(h, m) * acc;
  }
  return s / static_cast<double>(T);
}

// Scalar predictive regression helpers (p = 1). Observations are rows [b, e).
struct ScalarLongRun {
  double sigma_uu, omega_uv, omega_vv, rho2, omega_fm, delta;
};

inline ScalarLongRun scalar_long_run(const Vec& y, const Vec& x, bool intercept, std::size_t b, std::size_t e, double eta) {
  Mat X;
  for (double v : x) X.push_back({v});
  const Ols o = ols(y, X, intercept, b, e);
  const std::size_t n = e - b;
  // AR(1) of x, lead rows b+1..e-1 on lag rows b..e-2.
  double lag_mean = 0.0, lead_mean = 0.0;
  if (intercept) {
    for (std::size_t t = b; t + 1 < e; ++t) {
      lag_mean += x[t];
      lead_mean += x[t + 1];
    }
    lag_mean /= static_cast<double>(n - 1);
    lead_mean /= static_cast<double>(n - 1);
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t t = b; t + 1 < e; ++t) {
    sxy += (x[t + 1] - lead_mean) * (x[t] - lag_mean);
    sxx += (x[t] - lag_mean) * (x[t] - lag_mean);
  }
  const double rho = sxy / sxx;
  Vec v, u;
  for (std::size_t t = b; t + 1 < e; ++t) {
    v.push_back((x[t + 1] - lead_mean) - rho * (x[t] - lag_mean));
    u.push_back(o.residuals[t - b]);
  }
  std::size_t m = static_cast<std::size_t>(std::floor(eta * std::pow(static_cast<double>(n), 0.2)));
  m = std::min(m, v.size() - 1);
  ScalarLongRun lr{};
  lr.sigma_uu = o.ssr / static_cast<double>(n);
  lr.omega_uv = bartlett(u, v, m, true);
  lr.omega_vv = std::max(0.0, bartlett(v, v, m, true));
  lr.rho2 = std::clamp(lr.omega_uv * lr.omega_uv / (lr.omega_vv * lr.sigma_uu), 0.0, 1.0);
  lr.omega_fm = lr.sigma_uu * (1.0 - lr.rho2);
  double delta = 0.0;
  for (std::size_t h = 1; h <= m; ++h) {
    double acc = 0.0;
    for (std::size_t t = h; t < u.size(); ++t) acc += u[t] * v[t - h];
    delta += bartlett_weight(h, m) * acc;
  }
  lr.delta = delta / static_cast<double>(u.size());
  return lr;
}

struct ScalarIvx {
  double beta, alpha_ivz, q, ssr, zbar, sum_zx;
};

// IVX on rows [b, e) with instruments z (indexed like y); FM covariance.
inline ScalarIvx scalar_ivx(const Vec& y, const Vec& x, const Vec& z, bool intercept, std::size_t b, std::size_t e,
                            const ScalarLongRun& lr) {
  const std::size_t n = e - b;
  const double xb = intercept ? mean(x, b, e) : 0.0;
  const double yb = intercept ? mean(y, b, e) : 0.0;
  double zy = 0.0, zx = 0.0, zz = 0.0, zs = 0.0;
  for (std::size_t t = b; t < e; ++t) {
    zy += z[t] * (y[t] - yb);
    zx += z[t] * (x[t] - xb);
    zz += z[t] * z[t];
    zs += z[t];
  }
  ScalarIvx r{};
  r.beta = zy / zx;
  r.zbar = zs / static_cast<double>(n);
  double M = lr.sigma_uu * zz;
  if (intercept) M -= static_cast<double>(n) * r.zbar * r.zbar * lr.omega_fm;
  r.q = M / (zx * zx);
  r.sum_zx = zx;
  for (std::size_t t = b; t < e; ++t) {
    const double res = (y[t] - yb) - r.beta * (x[t] - xb);
    r.ssr += res * res;
  }
  r.alpha_ivz = mean(y, b, e) - r.beta * r.zbar;
  return r;
}

inline Vec scalar_instruments(const Vec& x, double rz, std::size_t b, std::size_t e) {
  Vec z(x.size(), 0.0);
  for (std::size_t r = b + 1; r < e; ++r)
    for (std::size_t j = b + 1; j <= r; ++j) z[r] += std::pow(rz, static_cast<double>(r - j)) * (x[j] - x[j - 1]);
  return z;
}

inline double rz_of(double cz, double delta, std::size_t T) { return 1.0 - cz / std::pow(static_cast<double>(T), delta); }

// Full-sample IVX-Wald for beta = 0 with the FM covariance.
inline double wald_ivx(const Vec& y, const Vec& x, bool intercept, double cz, double delta, double eta) {
  const std::size_t T = y.size();
  const Vec z = scalar_instruments(x, rz_of(cz, delta, T), 0, T);
  const ScalarLongRun lr = scalar_long_run(y, x, intercept, 0, T, eta);
  const ScalarIvx f = scalar_ivx(y, x, z, intercept, 0, T, lr);
  return f.beta * f.beta / f.q;
}

// Slope and intercept break statistics at candidate t (FM covariance,
// regime-two instruments restarted at t).
struct BreakPair {
  double w_beta, w_alpha;
};

inline BreakPair ivx_break_at(const Vec& y, const Vec& x, bool intercept, double cz, double delta, double eta, std::size_t t) {
  const std::size_t T = y.size();
  const double rz = rz_of(cz, delta, T);
  const Vec z1 = scalar_instruments(x, rz, 0, T);
  const Vec z2 = scalar_instruments(x, rz, t, T);
  const ScalarIvx f1 = scalar_ivx(y, x, z1, intercept, 0, t, scalar_long_run(y, x, intercept, 0, t, eta));
  const ScalarIvx f2 = scalar_ivx(y, x, z2, intercept, t, T, scalar_long_run(y, x, intercept, t, T, eta));
  BreakPair bp{};
  bp.w_beta = (f1.beta - f2.beta) * (f1.beta - f2.beta) / (f1.q + f2.q);
  const double n1 = static_cast<double>(t), n2 = static_cast<double>(T - t);
  const double om = f1.ssr / (n1 * n1) + f1.zbar * f1.zbar * f1.q + f2.ssr / (n2 * n2) + f2.zbar * f2.zbar * f2.q;
  bp.w_alpha = (f1.alpha_ivz - f2.alpha_ivz) * (f1.alpha_ivz - f2.alpha_ivz) / om;
  return bp;
}

// Sandwich form with instruments [1, z] for [1, x], the instrument recursion
// continued over the whole sample, (alpha, beta) compared jointly and the
// pooled variance (SSR1 + SSR2) / T.
inline double ivx_sandwich_break_at(const Vec& y, const Vec& x, double cz, double delta, std::size_t t) {
  const std::size_t T = y.size();
  const Vec z = scalar_instruments(x, rz_of(cz, delta, T), 0, T);
  struct Part {
    Vec theta;
    Mat cov;  // without the variance scale
    double ssr;
  };
  auto fit = [&](std::size_t b, std::size_t e) {
    // A = [sum 1, sum x; sum z, sum z x], theta = A^{-1} [sum y; sum z y]
    Mat A = zeros(2, 2), ZZ = zeros(2, 2);
    Vec rhs(2, 0.0);
    for (std::size_t s = b; s < e; ++s) {
      const double zs[2] = {1.0, z[s]};
      const double xs[2] = {1.0, x[s]};
      for (int i = 0; i < 2; ++i) {
        rhs[i] += zs[i] * y[s];
        for (int j = 0; j < 2; ++j) {
          A[i][j] += zs[i] * xs[j];
          ZZ[i][j] += zs[i] * zs[j];
        }
      }
    }
    const Mat Ai = inverse(A);
    Part p;
    p.theta = {Ai[0][0] * rhs[0] + Ai[0][1] * rhs[1], Ai[1][0] * rhs[0] + Ai[1][1] * rhs[1]};
    p.cov = zeros(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l) p.cov[i][j] += Ai[i][k] * ZZ[k][l] * Ai[j][l];
    p.ssr = 0.0;
    for (std::size_t s = b; s < e; ++s) {
      const double r = y[s] - p.theta[0] - p.theta[1] * x[s];
      p.ssr += r * r;
    }
    return p;
  };
  const Part a = fit(0, t), b = fit(t, T);
  const double sigma2 = (a.ssr + b.ssr) / static_cast<double>(T);
  Vec d{a.theta[0] - b.theta[0], a.theta[1] - b.theta[1]};
  Mat V = zeros(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) V[i][j] = sigma2 * (a.cov[i][j] + b.cov[i][j]);
  return quad_inv(d, V);
}

// OLS Chow statistic at t. `first` is the first compared coefficient (1 for
// the unstable policy, which leaves intercepts free).
inline double ols_break_at(const Vec& y, const Mat& X, bool intercept, std::size_t first, std::size_t t) {
  const std::size_t T = y.size();
  const std::size_t k = X[0].size() + (intercept ? 1 : 0);
  const Ols a = ols(y, X, intercept, 0, t);
  const Ols b = ols(y, X, intercept, t, T);
  const double sigma2 = (a.ssr + b.ssr) / static_cast<double>(T - 2 * k);
  Vec d;
  for (std::size_t i = first; i < k; ++i) d.push_back(a.theta[i] - b.theta[i]);
  Mat V = zeros(k - first, k - first);
  for (std::size_t i = first; i < k; ++i)
    for (std::size_t j = first; j < k; ++j) V[i - first][j - first] = a.inv_dd[i][j] + b.inv_dd[i][j];
  return quad_inv(d, V) / sigma2;
}

// rho + sigma2 [1/(1-rho) + rho/(1-rho^2) + rho/(1-rho^2)] / sxx
inline double kendall_scalar(double rho, double sigma2, double sxx) {
  return rho + sigma2 * (1.0 / (1.0 - rho) + rho / (1.0 - rho * rho) + rho / (1.0 - rho * rho)) / sxx;
}

}  // namespace oracle
