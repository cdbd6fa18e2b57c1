#pragma once

/// @file
/// Simulation of the limiting laws of the break statistics.
///
/// Brownian motions are partial sums of n Gaussian steps with variance 1/n.
/// OU paths use the mean-reverting recursion x_j = (1 - c/n) x_{j-1} + dW_j,
/// so c < 0 gives the explosive case. Stochastic integrals are left-endpoint
/// (Ito) sums and a break fraction pi maps to grid index j = pi n.

#include "ivxlab/core.hpp"
#include "ivxlab/linalg.hpp"
#include "ivxlab/parallel.hpp"
#include "ivxlab/random.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <string>

namespace ivxlab {

struct OuPath {
  Vector values;  ///< n + 1 points, values(0) = 0
  double c = 0.0;
  Index n = 0;
};

/// OU recursion driven by given increments (already scaled by 1/sqrt(n)).
inline Vector ou_from_increments(double c, const Vector& dW) {
  const Index n = dW.size();
  const double phi = 1.0 - c / static_cast<double>(n);
  Vector x(n + 1);
  x(0) = 0.0;
  for (Index j = 1; j <= n; ++j) x(j) = phi * x(j - 1) + dW(j - 1);
  return x;
}

inline OuPath simulate_ou_path(double c, Index n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("simulate_ou_path: n must be >= 1");
  NormalStream normal(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Vector dW(n);
  for (Index j = 0; j < n; ++j) dW(j) = scale * normal();
  return {ou_from_increments(c, dW), c, n};
}

enum class LimitLaw {
  sup_nbb,           ///< sup BB_p' BB_p / (pi (1 - pi))
  theorem2,          ///< sup N' M^{-1} N with R(pi) per persistence class
  theorem1_ols,      ///< sup OLS-Wald functional of the OU process
  joint_beta,        ///< chi2_p + sup N' M^{-1} N
  joint_alpha_beta,  ///< chi2_p + sup {BB_1^2 / (pi (1 - pi)) + N' M^{-1} N}
};

enum class PersistenceClass { below_one, unit, above_one };

inline std::string to_string(LimitLaw law) {
  switch (law) {
    case LimitLaw::sup_nbb: return "sup-nbb";
    case LimitLaw::theorem2: return "theorem2";
    case LimitLaw::theorem1_ols: return "theorem1-ols";
    case LimitLaw::joint_beta: return "joint-beta";
    case LimitLaw::joint_alpha_beta: return "joint-alpha-beta";
  }
  return "unknown";
}

inline LimitLaw limit_law_from_string(const std::string& s) {
  for (auto l : {LimitLaw::sup_nbb, LimitLaw::theorem2, LimitLaw::theorem1_ols, LimitLaw::joint_beta,
                 LimitLaw::joint_alpha_beta})
    if (to_string(l) == s) return l;
  throw std::invalid_argument("unknown limit law '" + s +
                              "' (expected sup-nbb|theorem2|theorem1-ols|joint-beta|joint-alpha-beta)");
}

inline std::string to_string(PersistenceClass c) {
  switch (c) {
    case PersistenceClass::below_one: return "gamma<1";
    case PersistenceClass::unit: return "gamma=1";
    case PersistenceClass::above_one: return "gamma>1";
  }
  return "unknown";
}

inline PersistenceClass persistence_class_from_string(const std::string& s) {
  if (s == "gamma<1" || s == "below") return PersistenceClass::below_one;
  if (s == "gamma=1" || s == "unit") return PersistenceClass::unit;
  if (s == "gamma>1" || s == "above") return PersistenceClass::above_one;
  throw std::invalid_argument("unknown persistence class '" + s + "' (expected below|unit|above)");
}

struct LimitLawSpec {
  LimitLaw law = LimitLaw::sup_nbb;
  Index p = 1;
  BreakWindow window;
  PersistenceClass persistence = PersistenceClass::below_one;
  double c = 0.0;          ///< OU coefficient for the unit class and the OLS law
  double rho = 0.0;        ///< correlation of B_u with the regressor noise (OLS law only)
  bool intercept = true;   ///< OLS law: include the intercept in the compared coefficients

  void validate() const {
    if (p < 1) throw std::invalid_argument("LimitLawSpec: p must be >= 1");
    window.validate();
    if (!std::isfinite(c)) throw std::invalid_argument("LimitLawSpec: c must be finite");
    if (persistence != PersistenceClass::unit && c != 0.0 && law != LimitLaw::theorem1_ols)
      throw std::invalid_argument("LimitLawSpec: c is only meaningful for the gamma = 1 class");
    if (!(rho > -1.0 && rho < 1.0)) throw std::invalid_argument("LimitLawSpec: rho must lie in (-1,1)");
  }
};

struct LawDraw {
  double value = 0.0;
  bool pseudo = false;
};

namespace detail {

/// (n+1) x q Brownian paths with B(0) = 0.
inline Matrix brownian_paths(Index n, Index q, NormalStream& normal) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Matrix B(n + 1, q);
  B.row(0).setZero();
  for (Index j = 1; j <= n; ++j)
    for (Index i = 0; i < q; ++i) B(j, i) = B(j - 1, i) + scale * normal();
  return B;
}

inline Matrix ou_paths(double c, const Matrix& B) {
  const Index n = B.rows() - 1;
  Matrix J(n + 1, B.cols());
  const Matrix dB = B.bottomRows(n) - B.topRows(n);
  for (Index i = 0; i < B.cols(); ++i) J.col(i) = ou_from_increments(c, dB.col(i));
  return J;
}

inline std::vector<Index> law_grid(Index n, const BreakWindow& w) { return w.grid(n, 1); }

inline double nbb_at(const Matrix& B, Index j, Index n) {
  const double pi = static_cast<double>(j) / static_cast<double>(n);
  const Vector bb = (B.row(j) - pi * B.row(n)).transpose();
  return bb.squaredNorm() / (pi * (1.0 - pi));
}

/// Per-grid N' M^{-1} N of the slope break functional. B drives J; for the
/// gamma < 1 class R(pi) = pi I and the functional is the NBB.
inline std::vector<LawDraw> theorem2_curve(const Matrix& B, PersistenceClass cls, double c, const std::vector<Index>& grid) {
  const Index n = B.rows() - 1;
  const Index p = B.cols();
  const Matrix I = Matrix::Identity(p, p);
  std::vector<LawDraw> out(grid.size());

  Matrix J;
  Matrix cumA;  // running sum of Jd_i dJ_{i+1}'
  std::vector<Matrix> A_at;
  bool pseudo_total = false;
  Matrix total_inv;
  if (cls != PersistenceClass::below_one) {
    J = cls == PersistenceClass::unit ? ou_paths(c, B) : B;
    const Vector mean = J.topRows(n).colwise().mean().transpose();
    A_at.resize(grid.size());
    cumA = Matrix::Zero(p, p);
    std::size_t g = 0;
    for (Index i = 0; i < n; ++i) {
      while (g < grid.size() && grid[g] == i) A_at[g++] = cumA;
      cumA += (J.row(i).transpose() - mean) * (J.row(i + 1) - J.row(i));
    }
    while (g < grid.size()) A_at[g++] = cumA;
    const Inverse inv = robust_inverse(I + cumA);
    total_inv = inv.value;
    pseudo_total = inv.pseudo;
  }

  for (std::size_t g = 0; g < grid.size(); ++g) {
    const Index j = grid[g];
    const double pi = static_cast<double>(j) / static_cast<double>(n);
    if (cls == PersistenceClass::below_one) {
      out[g].value = nbb_at(B, j, n);
      continue;
    }
    const Matrix R = (pi * I + A_at[g]) * total_inv;
    const Vector N = B.row(j).transpose() - R * B.row(n).transpose();
    const Matrix M = pi * (I - R) * (I - R).transpose() + (1.0 - pi) * R * R.transpose();
    const QuadraticForm qf = quadratic_form_inverse(N, M);
    out[g].value = std::max(0.0, qf.value);
    out[g].pseudo = qf.pseudo || pseudo_total;
  }
  return out;
}

/// Chow functional with K = (1, J) (or J alone without intercept) and the
/// error motion Bu.
inline std::vector<LawDraw> theorem1_curve(const Matrix& J, const Vector& Bu, bool intercept, const std::vector<Index>& grid) {
  const Index n = J.rows() - 1;
  const Index p = J.cols();
  const Index k = p + (intercept ? 1 : 0);
  const double dr = 1.0 / static_cast<double>(n);
  Matrix G = Matrix::Zero(k, k);
  Vector H = Vector::Zero(k);
  std::vector<Matrix> G_at(grid.size());
  std::vector<Vector> H_at(grid.size());
  std::size_t g = 0;
  Vector K(k);
  for (Index i = 0; i < n; ++i) {
    while (g < grid.size() && grid[g] == i) {
      G_at[g] = G;
      H_at[g] = H;
      ++g;
    }
    if (intercept) {
      K(0) = 1.0;
      K.tail(p) = J.row(i).transpose();
    } else {
      K = J.row(i).transpose();
    }
    G.noalias() += dr * K * K.transpose();
    H.noalias() += K * (Bu(i + 1) - Bu(i));
  }
  while (g < grid.size()) {
    G_at[g] = G;
    H_at[g] = H;
    ++g;
  }
  std::vector<LawDraw> out(grid.size());
  for (std::size_t m = 0; m < grid.size(); ++m) {
    const Inverse i1 = robust_inverse(G_at[m]);
    const Inverse i2 = robust_inverse(G - G_at[m]);
    const Vector d = i1.value * H_at[m] - i2.value * (H - H_at[m]);
    const QuadraticForm qf = quadratic_form_inverse(d, i1.value + i2.value);
    out[m].value = std::max(0.0, qf.value);
    out[m].pseudo = i1.pseudo || i2.pseudo || qf.pseudo;
  }
  return out;
}

inline LawDraw sup_of(const std::vector<LawDraw>& curve) {
  LawDraw best{curve.front().value, false};
  for (const auto& d : curve) {
    best.value = std::max(best.value, d.value);
    best.pseudo = best.pseudo || d.pseudo;
  }
  return best;
}

}  // namespace detail

/// One draw of the supremum functional (including any chi-square component).
inline LawDraw simulate_law_draw(const LimitLawSpec& spec, Index n, std::uint64_t seed) {
  const std::vector<Index> grid = detail::law_grid(n, spec.window);
  NormalStream normal(seed);
  const Index p = spec.p;
  switch (spec.law) {
    case LimitLaw::sup_nbb: {
      const Matrix B = detail::brownian_paths(n, p, normal);
      double best = 0.0;
      for (Index j : grid) best = std::max(best, detail::nbb_at(B, j, n));
      return {best, false};
    }
    case LimitLaw::theorem2: {
      const Matrix B = detail::brownian_paths(n, p, normal);
      return detail::sup_of(detail::theorem2_curve(B, spec.persistence, spec.c, grid));
    }
    case LimitLaw::theorem1_ols: {
      const Matrix W = detail::brownian_paths(n, p + 1, normal);
      const Matrix J = detail::ou_paths(spec.c, W.rightCols(p));
      // B_u shares correlation rho with the first regressor's noise.
      const Vector Bu = spec.rho * W.col(1) + std::sqrt(1.0 - spec.rho * spec.rho) * W.col(0);
      return detail::sup_of(detail::theorem1_curve(J, Bu, spec.intercept, grid));
    }
    case LimitLaw::joint_beta: {
      const Matrix B = detail::brownian_paths(n, p, normal);
      LawDraw d = detail::sup_of(detail::theorem2_curve(B, spec.persistence, spec.c, grid));
      for (Index i = 0; i < p; ++i) {
        const double z = normal();
        d.value += z * z;
      }
      return d;
    }
    case LimitLaw::joint_alpha_beta: {
      const Matrix B = detail::brownian_paths(n, p, normal);
      const Matrix B0 = detail::brownian_paths(n, 1, normal);
      const std::vector<LawDraw> curve = detail::theorem2_curve(B, spec.persistence, spec.c, grid);
      LawDraw d{0.0, false};
      for (std::size_t g = 0; g < grid.size(); ++g) {
        d.value = std::max(d.value, curve[g].value + detail::nbb_at(B0, grid[g], n));
        d.pseudo = d.pseudo || curve[g].pseudo;
      }
      for (Index i = 0; i < p; ++i) {
        const double z = normal();
        d.value += z * z;
      }
      return d;
    }
  }
  return {};
}

inline const std::vector<double>& default_alphas() {
  static const std::vector<double> a{0.01, 0.025, 0.05, 0.10};
  return a;
}

/// Quantiles of `reps` independent draws. Draw i uses derive_seed(seed, {i}).
inline CriticalValueTable simulate_critical_values(const LimitLawSpec& spec, Index reps, Index n, std::uint64_t seed,
                                                   const std::vector<double>& alphas = default_alphas()) {
  spec.validate();
  if (reps < 1) throw std::invalid_argument("simulate_critical_values: reps must be >= 1");
  if (n < 10) throw std::invalid_argument("simulate_critical_values: n must be >= 10");
  std::vector<double> draws(static_cast<std::size_t>(reps));
  std::vector<char> flags(static_cast<std::size_t>(reps), 0);
  parallel_for(reps, [&](long i) {
    const LawDraw d = simulate_law_draw(spec, n, derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    draws[i] = d.value;
    flags[i] = d.pseudo ? 1 : 0;
  });
  CriticalValueTable t;
  t.statistic = to_string(spec.law);
  t.p = spec.p;
  t.pi1 = spec.window.pi1;
  t.pi2 = spec.window.pi2;
  t.replications = reps;
  t.seed = seed;
  t.method = CvMethod::simulated_limit;
  t.flagged = std::count(flags.begin(), flags.end(), 1);
  t.quantiles = CriticalValueTable::quantiles_from(std::move(draws), alphas);
  return t;
}

/// Upper-alpha quantile of chi-square with q degrees of freedom.
inline double chi_squared_critical_value(Index q, double alpha) {
  if (q < 1 || !(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("chi_squared_critical_value: bad arguments");
  return boost::math::quantile(boost::math::complement(boost::math::chi_squared(static_cast<double>(q)), alpha));
}

struct PcRow {
  std::string estimator;  ///< "IVX" or "OLS"
  double pi = 0.0;
  double mean = 0.0;
  double lo95 = 0.0;
  double hi95 = 0.0;
};

/// Mean and pointwise 95% band of
///   P_IVX(pi) = (pi + int_0^pi Jd dJ) / (1 + int_0^1 Jd dJ)
///   P_OLS(pi) = int_0^pi J^2 dJ / int_0^1 J^2 dJ
/// with Jd the path demeaned by its grid mean.
inline std::vector<PcRow> pc_diagnostic(double c, const std::vector<double>& pi_grid, Index reps, Index n,
                                        std::uint64_t seed) {
  if (reps < 1 || n < 2) throw std::invalid_argument("pc_diagnostic: reps and n must be positive");
  std::vector<Index> idx;
  for (double pi : pi_grid) {
    if (!(pi > 0.0 && pi <= 1.0)) throw std::invalid_argument("pc_diagnostic: pi must lie in (0,1]");
    idx.push_back(static_cast<Index>(std::llround(pi * static_cast<double>(n))));
  }
  const std::size_t G = pi_grid.size();
  std::vector<std::vector<double>> ivx(G, std::vector<double>(reps)), ols(G, std::vector<double>(reps));
  parallel_for(reps, [&](long r) {
    const OuPath path = simulate_ou_path(c, n, derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    const Vector& J = path.values;
    const double mean = J.head(n).mean();
    Vector a(n + 1), b(n + 1);
    a(0) = b(0) = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double dJ = J(i + 1) - J(i);
      a(i + 1) = a(i) + (J(i) - mean) * dJ;
      b(i + 1) = b(i) + J(i) * J(i) * dJ;
    }
    const double dn = static_cast<double>(n);
    for (std::size_t g = 0; g < G; ++g) {
      const Index j = idx[g];
      ivx[g][r] = (static_cast<double>(j) / dn + a(j)) / (1.0 + a(n));
      ols[g][r] = b(j) / b(n);
    }
  });
  std::vector<PcRow> rows;
  auto summarize = [&](const char* name, std::vector<std::vector<double>>& draws) {
    for (std::size_t g = 0; g < G; ++g) {
      auto& d = draws[g];
      double sum = 0.0;
      for (double v : d) sum += v;
      std::sort(d.begin(), d.end());
      rows.push_back({name, pi_grid[g], sum / static_cast<double>(d.size()), empirical_quantile(d, 0.025),
                      empirical_quantile(d, 0.975)});
    }
  };
  summarize("IVX", ivx);
  summarize("OLS", ols);
  return rows;
}

}  // namespace ivxlab
