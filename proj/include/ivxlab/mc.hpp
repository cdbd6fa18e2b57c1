#pragma once

/// @file
/// Monte Carlo size and power experiments over (c, T, rho) grids.
///
/// Replication r of cell (c, T, rho) draws its sample with
/// derive_seed(master, {c, T, rho, r}), so a cell never depends on the worker
/// count, the evaluation order, or the other cells of the grid.

#include "ivxlab/asymptotics.hpp"
#include "ivxlab/bootstrap.hpp"
#include "ivxlab/breaktests.hpp"
#include "ivxlab/dgp.hpp"
#include "ivxlab/parallel.hpp"
#include "ivxlab/random.hpp"

#include <map>
#include <string>

namespace ivxlab {

/// How the innovation covariance depends on the cell's rho.
enum class CovPreset {
  unit,    ///< [[1, rho], [rho, 1]]
  table2,  ///< [[0.25, s], [s, 0.75]] with s = rho * sqrt(0.25 * 0.75)
  fixed,   ///< the experiment's own covariance, rho ignored
};

inline InnovationCov innovations_for(CovPreset preset, double rho, const InnovationCov& fixed) {
  switch (preset) {
    case CovPreset::unit: return InnovationCov::bivariate(1.0, 1.0, rho);
    case CovPreset::table2: return InnovationCov::bivariate(0.25, 0.75, rho);
    case CovPreset::fixed: return fixed;
  }
  return fixed;
}

struct McExperiment {
  DgpParams dgp;  ///< coefficients, break fraction, gamma_x, x0 and intercept policy
  CovPreset cov_preset = CovPreset::unit;
  std::vector<double> c_values{1.0};
  std::vector<Index> T_values{100};
  std::vector<double> rho_values{0.0};
  Index replications = 5000;
  double alpha = 0.05;
  StatisticKind statistic = StatisticKind::sup_wald_ols;
  IvxConfig config;
  BreakWindow window;
  std::uint64_t seed = 1;

  void validate() const {
    if (replications < 1) throw std::invalid_argument("McExperiment: replications must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("McExperiment: alpha must lie in (0,1)");
    if (c_values.empty() || T_values.empty() || rho_values.empty()) throw std::invalid_argument("McExperiment: empty grid");
    if (dgp.p() != 1 && cov_preset != CovPreset::fixed)
      throw std::invalid_argument("McExperiment: rho presets are bivariate; use a fixed covariance for p > 1");
    config.validate();
    window.validate();
  }

  /// DGP of one cell.
  [[nodiscard]] DgpParams cell_dgp(double c, double rho) const {
    DgpParams d = dgp;
    d.persistence.c = Vector::Constant(dgp.p(), c);
    d.innovations = innovations_for(cov_preset, rho, dgp.innovations);
    return d;
  }
};

/// Source of the critical value each replication is compared with.
struct CvSource {
  enum class Kind { fixed, table, bootstrap } kind = Kind::fixed;
  double value = 0.0;            ///< fixed
  CriticalValueTable table;      ///< table, looked up at the experiment's alpha
  BootstrapOptions bootstrap;    ///< per-replication bootstrap; seed is re-derived per replication

  static CvSource fixed_value(double v) {
    CvSource s;
    s.value = v;
    return s;
  }
  static CvSource from_table(CriticalValueTable t) {
    CvSource s;
    s.kind = Kind::table;
    s.table = std::move(t);
    return s;
  }
  static CvSource from_bootstrap(BootstrapOptions o) {
    CvSource s;
    s.kind = Kind::bootstrap;
    s.bootstrap = std::move(o);
    return s;
  }
  [[nodiscard]] std::string name() const {
    switch (kind) {
      case Kind::fixed: return "fixed";
      case Kind::table: return to_string(table.method);
      case Kind::bootstrap: return "bootstrap";
    }
    return "unknown";
  }
};

struct McCell {
  std::string statistic;
  double c = 0.0;
  Index T = 0;
  double rho = 0.0;
  double rejection_rate = 0.0;
  double stderr_ = 0.0;  ///< binomial standard error
  Index B = 0;
  double cv = 0.0;       ///< mean critical value over replications
  std::string cv_source;
  std::uint64_t seed = 0;
  Index failures = 0;    ///< replications whose statistic could not be computed
};

struct MonotoneCheck {
  double c = 0.0;
  double rho = 0.0;
  bool nondecreasing = true;  ///< rejection rate over the T grid in ascending order
};

struct McTable {
  std::vector<McCell> cells;
  std::vector<MonotoneCheck> monotone;
};

inline std::uint64_t replication_seed(std::uint64_t master, double c, Index T, double rho, Index rep) {
  return derive_seed(master, {seed_key(c), static_cast<std::uint64_t>(T), seed_key(rho), static_cast<std::uint64_t>(rep)});
}

namespace detail {

inline McCell run_cell(const McExperiment& exp, const DgpParams& dgp, double c, Index T, double rho, const CvSource& cv) {
  if (cv.kind == CvSource::Kind::table) {
    if (cv.table.statistic.empty()) throw std::invalid_argument("run_cell: empty critical value table");
    (void)cv.table.at(exp.alpha);
  }
  if (cv.kind == CvSource::Kind::bootstrap && exp.statistic == StatisticKind::wald_ivx)
    throw std::invalid_argument("run_cell: bootstrap critical values are offered for sup and joint statistics only");
  const Index B = exp.replications;
  std::vector<char> reject(B, 0), failed(B, 0);
  std::vector<double> used_cv(B, 0.0);
  parallel_for(B, [&](long r) {
    const std::uint64_t s = replication_seed(exp.seed, c, T, rho, r);
    try {
      const Sample sample = simulate_sample(dgp, T, s);
      const double stat = compute_statistic(exp.statistic, sample, exp.window, exp.config).value;
      double crit = cv.value;
      if (cv.kind == CvSource::Kind::table) {
        crit = cv.table.at(exp.alpha);
      } else if (cv.kind == CvSource::Kind::bootstrap) {
        BootstrapOptions o = cv.bootstrap;
        o.alphas = {exp.alpha};
        o.seed = derive_seed(s, {0xB0075ULL});
        crit = wild_bootstrap_critical_value(sample, exp.statistic, exp.window, exp.config, o).at(exp.alpha);
      }
      used_cv[r] = crit;
      reject[r] = stat > crit ? 1 : 0;
    } catch (const std::exception&) {
      failed[r] = 1;
    }
  });
  McCell cell;
  cell.statistic = to_string(exp.statistic);
  cell.c = c;
  cell.T = T;
  cell.rho = rho;
  cell.cv_source = cv.name();
  cell.seed = exp.seed;
  Index n = 0, hits = 0;
  double cv_sum = 0.0;
  for (Index r = 0; r < B; ++r) {
    if (failed[r]) {
      ++cell.failures;
      continue;
    }
    ++n;
    hits += reject[r];
    cv_sum += used_cv[r];
  }
  cell.B = n;
  if (n > 0) {
    cell.rejection_rate = static_cast<double>(hits) / static_cast<double>(n);
    cell.stderr_ = std::sqrt(cell.rejection_rate * (1.0 - cell.rejection_rate) / static_cast<double>(n));
    cell.cv = cv.kind == CvSource::Kind::bootstrap ? cv_sum / static_cast<double>(n) : cv.kind == CvSource::Kind::table ? cv.table.at(exp.alpha) : cv.value;
  }
  return cell;
}

inline std::vector<MonotoneCheck> monotone_checks(const McExperiment& exp, const std::vector<McCell>& cells) {
  std::vector<MonotoneCheck> out;
  std::vector<Index> Ts = exp.T_values;
  std::sort(Ts.begin(), Ts.end());
  for (double c : exp.c_values)
    for (double rho : exp.rho_values) {
      MonotoneCheck m{c, rho, true};
      double prev = -1.0;
      for (Index T : Ts)
        for (const auto& cell : cells)
          if (cell.c == c && cell.rho == rho && cell.T == T) {
            if (cell.rejection_rate < prev) m.nondecreasing = false;
            prev = cell.rejection_rate;
          }
      out.push_back(m);
    }
  return out;
}

}  // namespace detail

/// Null rejection frequencies. The experiment's DGP must have no break.
inline McTable run_size_experiment(const McExperiment& exp, const CvSource& cv) {
  exp.validate();
  const DgpParams& d = exp.dgp;
  if (d.break_fraction && (d.alpha1 != d.alpha2 || d.beta1 != d.beta2))
    throw std::invalid_argument("run_size_experiment: the DGP must impose the null (theta1 = theta2)");
  McTable table;
  for (double c : exp.c_values)
    for (Index T : exp.T_values)
      for (double rho : exp.rho_values) table.cells.push_back(detail::run_cell(exp, exp.cell_dgp(c, rho), c, T, rho, cv));
  return table;
}

/// Rejection frequencies under the local alternative beta2 = beta1 + b / T
/// at the experiment's break fraction (0.5 when unset). Includes the check
/// that power is nondecreasing in T for every (c, rho).
inline McTable run_power_experiment(const McExperiment& exp, double b, const CvSource& cv) {
  exp.validate();
  McTable table;
  for (double c : exp.c_values)
    for (Index T : exp.T_values)
      for (double rho : exp.rho_values) {
        DgpParams d = exp.cell_dgp(c, rho);
        if (!d.break_fraction) d.break_fraction = 0.5;
        d.beta2 = d.beta1.array() + b / static_cast<double>(T);
        table.cells.push_back(detail::run_cell(exp, d, c, T, rho, cv));
      }
  table.monotone = detail::monotone_checks(exp, table.cells);
  return table;
}

struct McPreset {
  McExperiment experiment;
  double cv = 0.0;
};

inline const std::vector<double>& design_rho_grid() {
  static const std::vector<double> r{-0.9, -0.7, -0.5, -0.3, 0.0, 0.3, 0.5, 0.7, 0.9};
  return r;
}

/// Built-in experiments: table1, table1a (explosive), table2 and table2-cv12.
inline McPreset mc_preset(const std::string& name) {
  McPreset p;
  McExperiment& e = p.experiment;
  e.T_values = {100, 250, 500, 1000};
  e.rho_values = design_rho_grid();
  Vector one(1);
  if (name == "table1" || name == "table1a") {
    one(0) = 0.25;
    e.dgp = DgpParams::stable_system(0.0, one, PersistenceSpec(Vector::Ones(1), 1.0), InnovationCov::bivariate(1, 1, 0),
                                     Intercept::none);
    e.cov_preset = CovPreset::unit;
    e.statistic = StatisticKind::sup_wald_ols;
    e.c_values = name == "table1" ? std::vector<double>{1, 5, 10, 20} : std::vector<double>{-1, -5, -10, -20};
    p.cv = 8.85;
  } else if (name == "table2" || name == "table2-cv12") {
    one(0) = 0.5;
    e.dgp = DgpParams::stable_system(0.25, one, PersistenceSpec(Vector::Ones(1), 1.0), InnovationCov::bivariate(0.25, 0.75, 0),
                                     Intercept::stable);
    e.cov_preset = CovPreset::table2;
    e.statistic = StatisticKind::sup_wald_ivx_beta;
    e.c_values = {1, 5};
    e.config.c_z = 1.0;
    e.config.delta_z = 0.75;
    e.config.fm_covariance = false;
    e.config.restart_regime_instruments = false;
    p.cv = name == "table2" ? 13.42 : 12.0;
  } else {
    throw std::invalid_argument("unknown preset '" + name + "' (expected table1|table1a|table2|table2-cv12)");
  }
  return p;
}

}  // namespace ivxlab
