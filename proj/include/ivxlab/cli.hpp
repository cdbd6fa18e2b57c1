#pragma once

/// @file
/// The ivxlab command line: subcommands, flag parsing, JSON config files and
/// artifact writing. run_command is the whole program; tools/ivxlab.cpp only
/// forwards argv to it.

#include "ivxlab/asymptotics.hpp"
#include "ivxlab/bootstrap.hpp"
#include "ivxlab/breaktests.hpp"
#include "ivxlab/estimators.hpp"
#include "ivxlab/io.hpp"
#include "ivxlab/mc.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace ivxlab {

inline constexpr const char* kVersion = "1.0.0";

namespace cli {

using nlohmann::json;

/// Every flag of every subcommand. Subcommands bind the subset they use.
struct Options {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  bool fast = false;

  // data
  std::string csv, y, ret, riskfree, intercept = "stable";
  std::vector<std::string> x;

  // ivx tuning
  double cz = 1.0, delta = 0.95, eta = 1.0;
  bool bias_correct = false, sandwich = false, no_restart = false;

  std::vector<double> window{0.15, 0.85};
  std::vector<double> alphas;
  double alpha = 0.05;
  std::vector<std::string> stats;
  std::string stat;

  // critical values
  std::string cv_source = "auto";
  double cv = 0.0;
  Index reps = 10000;
  Index steps = 1000;
  std::string law = "sup-nbb";
  Index law_p = 1;
  std::string persistence = "below";
  double law_c = 0.0, law_rho = 0.0;
  bool law_no_intercept = false;
  Index draws = 399;
  std::string multiplier = "normal";
  bool no_bootstrap_bias_correct = false;

  // estimate
  Index hac_lags = -1;

  // mc
  std::string preset;
  std::vector<double> c_values, rho_values;
  std::vector<Index> T_values;
  Index replications = 5000;
  double gamma = 1.0, dgp_alpha = 0.0, dgp_beta = 0.0, b = 0.0, break_fraction = 0.5;
  std::string cov = "unit";

  // pc-diagnostic
  double pc_c = 1.0;
  std::vector<double> pi_grid;
};

/// Thrown for invalid flag values that CLI11 cannot see (exit status 2).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config_path, "flat JSON file of flag values; command-line flags win");
  sub->add_option("--out", o.out_dir, "directory for CSV/JSON artifacts");
  sub->add_option("--seed", o.seed, "master seed");
  sub->add_flag("--fast", o.fast, "small replication counts for smoke runs");
}

inline void add_data(CLI::App* sub, Options& o) {
  sub->add_option("--csv", o.csv, "input CSV with a header row")->required();
  sub->add_option("--y", o.y, "dependent column");
  sub->add_option("--x", o.x, "predictor columns (comma list)")->delimiter(',')->required();
  sub->add_option("--return", o.ret, "premium mode: total return column");
  sub->add_option("--riskfree", o.riskfree, "premium mode: risk-free column");
  sub->add_option("--intercept", o.intercept, "intercept policy")->check(CLI::IsMember({"none", "stable", "unstable"}));
}

inline void add_ivx(CLI::App* sub, Options& o) {
  sub->add_option("--ivx-cz", o.cz, "instrument coefficient c_z")->check(CLI::NonNegativeNumber);
  sub->add_option("--ivx-delta", o.delta, "instrument exponent delta_z in (0,1)")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--eta", o.eta, "bandwidth m = floor(eta T^(1/5))")->check(CLI::PositiveNumber);
  sub->add_flag("--bias-correct", o.bias_correct, "subtract the long-run bias estimate from the IVX numerator");
  sub->add_flag("--sandwich", o.sandwich, "plain sandwich covariance instead of the fully modified form");
  sub->add_flag("--no-restart", o.no_restart, "continue the instrument recursion into the second regime");
}

inline void add_window(CLI::App* sub, Options& o) {
  sub->add_option("--window", o.window, "trimming fractions pi1,pi2")->delimiter(',')->expected(2);
}

/// Applies explicitly given IVX flags on top of `base`.
inline IvxConfig ivx_config(const CLI::App* sub, const Options& o, IvxConfig base = {}) {
  if (sub->count("--ivx-cz")) base.c_z = o.cz;
  if (sub->count("--ivx-delta")) base.delta_z = o.delta;
  if (sub->count("--eta")) base.bandwidth_eta = o.eta;
  if (o.bias_correct) base.bias_correct = true;
  if (o.sandwich) base.fm_covariance = false;
  if (o.no_restart) base.restart_regime_instruments = false;
  base.validate();
  return base;
}

inline BreakWindow window_of(const Options& o) {
  if (o.window.size() != 2) throw UsageError("--window needs exactly two values pi1,pi2");
  BreakWindow w{o.window[0], o.window[1]};
  try {
    w.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--window: ") + e.what());
  }
  return w;
}

inline ColumnMapping mapping_of(const Options& o) {
  ColumnMapping m;
  m.y = o.y;
  m.x = o.x;
  if (!o.ret.empty()) m.ret = o.ret;
  if (!o.riskfree.empty()) m.riskfree = o.riskfree;
  m.intercept = intercept_from_string(o.intercept);
  return m;
}

inline json provenance(const CLI::App* sub, const Options& o) {
  json cfg = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (name == "help" || name == "config" || name == "out") continue;
    if (opt->count() > 0) {
      std::string v;
      for (const auto& r : opt->results()) v += (v.empty() ? "" : ",") + r;
      cfg[name] = v;
    } else {
      cfg[name] = opt->get_default_str();
    }
  }
  return {{"command", sub->get_name()}, {"version", kVersion}, {"seed", o.seed}, {"config", cfg}};
}

/// Writes `body` to <out>/<name> and the provenance sidecar <out>/<stem>.json.
template <class Writer>
void write_artifact(const Options& o, const std::string& name, json meta, Writer body) {
  namespace fs = std::filesystem;
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  const fs::path file = dir / name;
  {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    body(out);
  }
  meta["artifact"] = name;
  std::ofstream side(dir / (fs::path(name).stem().string() + ".json"));
  side << meta.dump(2) << '\n';
}

inline std::string flag_list(const std::vector<double>& v) {
  std::string s;
  for (double d : v) s += (s.empty() ? "" : ",") + format_double(d);
  return s;
}

/// Limit law matching a statistic on samples with p regressors.
inline LimitLawSpec law_for(StatisticKind kind, Index p, Intercept intercept, const IvxConfig& config,
                            const BreakWindow& window, PersistenceClass cls, double c) {
  LimitLawSpec s;
  s.window = window;
  s.p = p;
  s.persistence = cls;
  s.c = cls == PersistenceClass::unit ? c : 0.0;
  switch (kind) {
    case StatisticKind::sup_wald_ols:
      s.law = LimitLaw::sup_nbb;
      s.persistence = PersistenceClass::below_one;
      s.c = 0.0;
      if (intercept == Intercept::stable) s.p = p + 1;
      break;
    case StatisticKind::sup_wald_ivx_beta:
      if (!config.fm_covariance && intercept == Intercept::stable) {
        s.law = LimitLaw::sup_nbb;
        s.persistence = PersistenceClass::below_one;
        s.c = 0.0;
        s.p = p + 1;
      } else {
        s.law = LimitLaw::theorem2;
      }
      break;
    case StatisticKind::sup_wald_ivx_alpha:
      s.law = LimitLaw::sup_nbb;
      s.persistence = PersistenceClass::below_one;
      s.c = 0.0;
      s.p = 1;
      break;
    case StatisticKind::joint_beta: s.law = LimitLaw::joint_beta; break;
    case StatisticKind::joint_alpha_beta: s.law = LimitLaw::joint_alpha_beta; break;
    case StatisticKind::wald_ivx: throw std::invalid_argument("law_for: wald-ivx uses the chi-square law");
  }
  return s;
}

inline std::string resolve_cv_source(const Options& o, StatisticKind kind, bool cv_given) {
  std::string src = o.cv_source;
  if (src == "auto") src = cv_given ? "fixed" : (kind == StatisticKind::wald_ivx ? "chi2" : "simulated");
  if (src == "chi2" && kind != StatisticKind::wald_ivx) throw UsageError("--cv-source chi2 applies to wald-ivx only");
  if ((src == "simulated" || src == "bootstrap") && kind == StatisticKind::wald_ivx)
    throw UsageError("--cv-source " + src + " applies to sup and joint statistics; use chi2 for wald-ivx");
  if (src == "fixed" && !cv_given) throw UsageError("--cv-source fixed requires --cv");
  return src;
}

inline Index scaled(Index full, Index fast, bool is_fast, bool given) { return given || !is_fast ? full : fast; }

// Subcommands ---------------------------------------------------------------

inline void cmd_estimate(const CLI::App* sub, const Options& o, std::ostream& out) {
  const IngestResult in = ingest_predictor_csv(o.csv, mapping_of(o));
  const Sample& s = in.sample;
  const IvxConfig config = ivx_config(sub, o);
  const IndexRange all = s.full();
  const FitResult ols = ols_fit(s, all);
  const Index m = o.hac_lags >= 0 ? o.hac_lags : config.bandwidth(s.T());
  const Matrix hac = ols_hac_covariance(s, all, ols, m);
  const double r2 = r_squared(s, all, ols);
  const FitResult ivx = ivx_full_fit(s, config);
  const double w = wald_ivx_full(s, config);
  const double w_p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(static_cast<double>(s.p())), w));

  const Index off = s.has_intercept() ? 1 : 0;
  auto term = [&](Index j) { return j < 0 ? std::string("alpha") : "beta_" + o.x[static_cast<std::size_t>(j)]; };
  std::ostringstream csv;
  csv << "estimator,term,estimate,stderr,t_stat,r_squared,T\n";
  auto row = [&](const char* est, const std::string& name, double value, double se, double rsq) {
    csv << est << ',' << name << ',' << format_double(value) << ',' << format_double(se) << ','
        << format_double(value / se) << ',' << format_double(rsq) << ',' << s.T() << '\n';
  };
  if (ols.alpha) row("OLS", term(-1), *ols.alpha, std::sqrt(hac(0, 0)), r2);
  for (Index j = 0; j < s.p(); ++j) row("OLS", term(j), ols.beta(j), std::sqrt(hac(off + j, off + j)), r2);
  for (Index j = 0; j < s.p(); ++j) row("IVX", term(j), ivx.beta(j), std::sqrt(ivx.cov_beta(j, j)), r_squared(s, all, ivx));

  json meta = provenance(sub, o);
  meta["dates"] = in.dates;
  meta["dropped"] = in.dropped;
  meta["T"] = s.T();
  meta["hac_lags"] = m;
  meta["wald_ivx"] = w;
  meta["wald_ivx_pvalue"] = w_p;
  write_artifact(o, "estimate.csv", meta, [&](std::ostream& f) { f << csv.str(); });

  out << "estimate T=" << s.T() << " dropped=" << in.dropped << '\n';
  for (Index j = 0; j < s.p(); ++j) {
    const double se = std::sqrt(hac(off + j, off + j));
    out << "  OLS " << term(j) << " = " << ols.beta(j) << " (t_HAC = " << ols.beta(j) / se << ", R2 = " << r2 << ")\n";
    out << "  IVX " << term(j) << " = " << ivx.beta(j) << " (se = " << std::sqrt(ivx.cov_beta(j, j)) << ")\n";
  }
  out << "  IVX-Wald(beta = 0) = " << w << " (p = " << w_p << ")\n";
}

inline double critical_value_for(const std::string& src, StatisticKind kind, const Sample& s, const BreakWindow& window,
                                 const IvxConfig& config, const Options& o, const CLI::App* sub) {
  if (src == "fixed") return o.cv;
  if (src == "chi2") return chi_squared_critical_value(s.p(), o.alpha);
  if (src == "simulated") {
    const LimitLawSpec spec =
        law_for(kind, s.p(), s.intercept(), config, window, persistence_class_from_string(o.persistence), o.law_c);
    const Index reps = scaled(o.reps, 2000, o.fast, sub->count("--reps") > 0);
    return simulate_critical_values(spec, reps, o.steps, o.seed, {o.alpha}).at(o.alpha);
  }
  BootstrapOptions b;
  b.draws = scaled(o.draws, 199, o.fast, sub->count("--draws") > 0);
  b.alphas = {o.alpha};
  b.seed = o.seed;
  b.multiplier = multiplier_from_string(o.multiplier);
  b.bias_correct = !o.no_bootstrap_bias_correct;
  return wild_bootstrap_critical_value(s, kind, window, config, b).at(o.alpha);
}

inline void cmd_test(const CLI::App* sub, const Options& o, std::ostream& out) {
  const IngestResult in = ingest_predictor_csv(o.csv, mapping_of(o));
  const Sample& s = in.sample;
  const IvxConfig config = ivx_config(sub, o);
  const BreakWindow window = window_of(o);
  if (!(o.alpha > 0.0 && o.alpha < 1.0)) throw UsageError("--alpha must lie in (0,1)");
  std::vector<TestReport> reports;
  json sources = json::object();
  for (const auto& name : o.stats) {
    const StatisticKind kind = statistic_from_string(name);
    const std::string src = resolve_cv_source(o, kind, sub->count("--cv") > 0);
    const double cv = critical_value_for(src, kind, s, window, config, o, sub);
    reports.push_back(run_test(kind, s, window, config, cv, o.alpha));
    sources[name] = src;
    const TestReport& r = reports.back();
    out << "test " << name << " value=" << r.value << " cv=" << r.critical_value << " alpha=" << r.alpha
        << " decision=" << (r.reject ? "reject" : "fail-to-reject");
    if (r.break_fraction) out << " break_fraction=" << *r.break_fraction;
    out << '\n';
  }
  json meta = provenance(sub, o);
  meta["T"] = s.T();
  meta["dropped"] = in.dropped;
  meta["cv_source"] = sources;
  write_artifact(o, "test.csv", meta, [&](std::ostream& f) { write_test_reports_csv(f, reports); });
}

inline void cmd_simulate_cv(const CLI::App* sub, const Options& o, std::ostream& out) {
  LimitLawSpec spec;
  spec.law = limit_law_from_string(o.law);
  spec.p = o.law_p;
  spec.window = window_of(o);
  spec.persistence = persistence_class_from_string(o.persistence);
  spec.c = o.law_c;
  spec.rho = o.law_rho;
  spec.intercept = !o.law_no_intercept;
  const Index reps = scaled(o.reps, 2000, o.fast, sub->count("--reps") > 0);
  const std::vector<double> alphas = o.alphas.empty() ? default_alphas() : o.alphas;
  const CriticalValueTable t = simulate_critical_values(spec, reps, o.steps, o.seed, alphas);
  write_artifact(o, "cv_table.csv", provenance(sub, o), [&](std::ostream& f) { write_cv_table_csv(f, t); });
  for (const auto& [a, c] : t.quantiles)
    out << "simulate-cv " << t.statistic << " p=" << t.p << " alpha=" << a << " cv=" << c << '\n';
  if (t.flagged > 0) out << "  " << t.flagged << " draws used a pseudo-inverse\n";
}

inline void cmd_bootstrap_cv(const CLI::App* sub, const Options& o, std::ostream& out) {
  const IngestResult in = ingest_predictor_csv(o.csv, mapping_of(o));
  const StatisticKind kind = statistic_from_string(o.stat);
  BootstrapOptions b;
  b.draws = scaled(o.draws, 199, o.fast, sub->count("--draws") > 0);
  b.alphas = o.alphas.empty() ? std::vector<double>{0.01, 0.05, 0.10} : o.alphas;
  b.seed = o.seed;
  b.multiplier = multiplier_from_string(o.multiplier);
  b.bias_correct = !o.no_bootstrap_bias_correct;
  const CriticalValueTable t = wild_bootstrap_critical_value(in.sample, kind, window_of(o), ivx_config(sub, o), b);
  json meta = provenance(sub, o);
  meta["T"] = in.sample.T();
  meta["dropped"] = in.dropped;
  write_artifact(o, "bootstrap_cv.csv", meta, [&](std::ostream& f) { write_cv_table_csv(f, t); });
  for (const auto& [a, c] : t.quantiles) out << "bootstrap-cv " << t.statistic << " alpha=" << a << " cv=" << c << '\n';
  if (t.discarded > 0) out << "  " << t.discarded << " draws discarded\n";
  if (t.flagged > 0) out << "  bias correction skipped (near-unit root estimate)\n";
}

/// The experiment described by --preset plus any explicit overrides.
inline McPreset experiment_of(const CLI::App* sub, const Options& o) {
  McPreset p;
  if (!o.preset.empty()) {
    p = mc_preset(o.preset);
  } else {
    p.experiment.dgp = DgpParams::stable_system(0.0, Vector::Zero(1), PersistenceSpec(Vector::Ones(1), 1.0),
                                                InnovationCov::bivariate(1, 1, 0), Intercept::stable);
    p.experiment.c_values = {1.0};
    p.experiment.T_values = {100};
    p.experiment.rho_values = {0.0};
    p.cv = 0.0;
  }
  McExperiment& e = p.experiment;
  if (sub->count("--stat")) e.statistic = statistic_from_string(o.stat);
  if (sub->count("--c")) e.c_values = o.c_values;
  if (sub->count("--T")) e.T_values = o.T_values;
  if (sub->count("--rho")) e.rho_values = o.rho_values;
  if (sub->count("--gamma")) e.dgp.persistence.gamma_x = o.gamma;
  if (sub->count("--dgp-alpha")) e.dgp.alpha1 = e.dgp.alpha2 = o.dgp_alpha;
  if (sub->count("--dgp-beta")) e.dgp.beta1 = e.dgp.beta2 = Vector::Constant(1, o.dgp_beta);
  if (sub->count("--intercept")) e.dgp.intercept = intercept_from_string(o.intercept);
  if (sub->count("--cov")) e.cov_preset = o.cov == "table2" ? CovPreset::table2 : CovPreset::unit;
  if (sub->count("--cv")) p.cv = o.cv;
  if (sub->count("--alpha")) e.alpha = o.alpha;
  e.window = window_of(o);
  e.config = ivx_config(sub, o, e.config);
  e.seed = o.seed;
  e.replications = o.fast && !sub->count("--reps") ? 500 : (sub->count("--reps") ? o.replications : e.replications);
  return p;
}

inline CvSource mc_cv_source(const CLI::App* sub, const Options& o, const McPreset& p) {
  const McExperiment& e = p.experiment;
  std::string src = o.cv_source;
  if (src == "auto") src = e.statistic == StatisticKind::wald_ivx ? "chi2" : (p.cv > 0.0 ? "fixed" : "simulated");
  if (src == "fixed") {
    if (!(p.cv > 0.0)) throw UsageError("a fixed critical value needs --cv (or a preset)");
    return CvSource::fixed_value(p.cv);
  }
  if (src == "chi2") {
    if (e.statistic != StatisticKind::wald_ivx) throw UsageError("--cv-source chi2 applies to wald-ivx only");
    return CvSource::fixed_value(chi_squared_critical_value(e.dgp.p(), e.alpha));
  }
  if (src == "simulated") {
    if (e.statistic == StatisticKind::wald_ivx) throw UsageError("use --cv-source chi2 for wald-ivx");
    const LimitLawSpec spec = law_for(e.statistic, e.dgp.p(), e.dgp.intercept, e.config, e.window,
                                      persistence_class_from_string(o.persistence), o.law_c);
    const Index reps = scaled(o.reps, 2000, o.fast, sub->count("--law-reps") > 0);
    return CvSource::from_table(simulate_critical_values(spec, reps, o.steps, derive_seed(o.seed, {0xC7ULL}), {e.alpha}));
  }
  if (src == "bootstrap") {
    BootstrapOptions b;
    b.draws = scaled(o.draws, 199, o.fast, sub->count("--draws") > 0);
    b.multiplier = multiplier_from_string(o.multiplier);
    b.bias_correct = !o.no_bootstrap_bias_correct;
    return CvSource::from_bootstrap(b);
  }
  throw UsageError("unknown --cv-source '" + src + "'");
}

inline void print_cells(std::ostream& out, const char* cmd, const McTable& t) {
  for (const auto& c : t.cells)
    out << cmd << ' ' << c.statistic << " c=" << c.c << " T=" << c.T << " rho=" << c.rho << " rate=" << c.rejection_rate
        << " se=" << c.stderr_ << " B=" << c.B << (c.failures ? " failures=" + std::to_string(c.failures) : "") << '\n';
}

inline void cmd_mc(const CLI::App* sub, const Options& o, std::ostream& out, bool power) {
  const McPreset p = experiment_of(sub, o);
  const CvSource cv = mc_cv_source(sub, o, p);
  json meta = provenance(sub, o);
  meta["replications"] = p.experiment.replications;
  meta["cv_source"] = cv.name();
  if (!power) {
    const McTable t = run_size_experiment(p.experiment, cv);
    write_artifact(o, "mc_size.csv", meta, [&](std::ostream& f) { write_mc_csv(f, t); });
    print_cells(out, "mc-size", t);
    return;
  }
  McExperiment e = p.experiment;
  e.dgp.break_fraction = o.break_fraction;
  const McTable t = run_power_experiment(e, o.b, cv);
  meta["b"] = o.b;
  write_artifact(o, "mc_power.csv", meta, [&](std::ostream& f) { write_mc_csv(f, t); });
  write_artifact(o, "mc_power_monotone.csv", meta, [&](std::ostream& f) { write_monotone_csv(f, t); });
  print_cells(out, "mc-power", t);
  for (const auto& m : t.monotone)
    if (!m.nondecreasing) out << "  power not monotone in T at c=" << m.c << " rho=" << m.rho << '\n';
}

inline void cmd_pc(const CLI::App* sub, const Options& o, std::ostream& out) {
  std::vector<double> grid = o.pi_grid;
  if (grid.empty())
    for (int k = 1; k <= 20; ++k) grid.push_back(0.05 * k);
  const Index reps = scaled(o.reps, 200, o.fast, sub->count("--reps") > 0);
  const std::vector<PcRow> rows = pc_diagnostic(o.pc_c, grid, reps, o.steps, o.seed);
  write_artifact(o, "pc_diagnostic.csv", provenance(sub, o), [&](std::ostream& f) { write_pc_csv(f, rows); });
  out << "pc-diagnostic c=" << o.pc_c << " reps=" << reps << " rows=" << rows.size() << '\n';
}

/// Appends flags from the JSON file named by --config that argv does not set.
inline std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw UsageError("--config: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError("--config: " + std::string(e.what()));
  }
  if (!j.is_object()) throw UsageError("--config: expected a flat JSON object");
  auto given = [&](const std::string& flag) {
    for (const auto& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
  };
  auto scalar = [](const json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    if (v.is_number()) return format_double(v.get<double>());
    throw UsageError("--config: nested values are not supported");
  };
  for (const auto& [key, value] : j.items()) {
    const std::string flag = "--" + key;
    if (key == "config" || given(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) joined += (joined.empty() ? "" : ",") + scalar(v);
      args.push_back(flag);
      args.push_back(joined);
    } else {
      args.push_back(flag);
      args.push_back(scalar(value));
    }
  }
  return args;
}

}  // namespace detail

/// Runs one ivxlab invocation. Returns 0 on success, 2 on usage errors and
/// 1 on numerical or I/O failures.
inline int run_command(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  Options o;
  CLI::App app{"IVX predictive regressions and structural-break tests", "ivxlab"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CLI::App* est = app.add_subcommand("estimate", "OLS (HAC t) and IVX estimates with the full-sample IVX-Wald test");
  detail::add_common(est, o);
  detail::add_data(est, o);
  detail::add_ivx(est, o);
  est->add_option("--hac-lags", o.hac_lags, "Bartlett lags for the OLS t statistic (default: bandwidth rule)");

  CLI::App* test = app.add_subcommand("test", "predictability and break tests on CSV data");
  detail::add_common(test, o);
  detail::add_data(test, o);
  detail::add_ivx(test, o);
  detail::add_window(test, o);
  test->add_option("--stat", o.stats, "statistics (comma list)")->delimiter(',')->required();
  test->add_option("--alpha", o.alpha, "test size");
  test->add_option("--cv", o.cv, "fixed critical value");
  test->add_option("--cv-source", o.cv_source, "critical values")
      ->check(CLI::IsMember({"auto", "fixed", "chi2", "simulated", "bootstrap"}));
  test->add_option("--reps", o.reps, "limit-law draws for simulated critical values");
  test->add_option("--n", o.steps, "discretization steps of the limit law");
  test->add_option("--persistence", o.persistence, "persistence class of the limit law (below|unit|above)");
  test->add_option("--law-c", o.law_c, "OU coefficient for the unit class");
  test->add_option("--draws", o.draws, "bootstrap draws");
  test->add_option("--multiplier", o.multiplier, "bootstrap multipliers")->check(CLI::IsMember({"normal", "rademacher"}));
  test->add_flag("--no-bootstrap-bias-correct", o.no_bootstrap_bias_correct, "use the OLS autoregression in the bootstrap");

  CLI::App* sim = app.add_subcommand("simulate-cv", "critical values of a simulated limit law");
  detail::add_common(sim, o);
  detail::add_window(sim, o);
  sim->add_option("--law", o.law, "sup-nbb|theorem2|theorem1-ols|joint-beta|joint-alpha-beta");
  sim->add_option("--p", o.law_p, "dimension")->check(CLI::PositiveNumber);
  sim->add_option("--alpha", o.alphas, "sizes (comma list)")->delimiter(',');
  sim->add_option("--reps", o.reps, "draws")->check(CLI::PositiveNumber);
  sim->add_option("--n", o.steps, "discretization steps")->check(CLI::Range(10, 1000000));
  sim->add_option("--persistence", o.persistence, "below|unit|above");
  sim->add_option("--c", o.law_c, "OU coefficient (unit class, theorem1-ols)");
  sim->add_option("--rho", o.law_rho, "innovation correlation (theorem1-ols)");
  sim->add_flag("--no-intercept", o.law_no_intercept, "theorem1-ols without the intercept");

  CLI::App* boot = app.add_subcommand("bootstrap-cv", "wild bootstrap critical values on CSV data");
  detail::add_common(boot, o);
  detail::add_data(boot, o);
  detail::add_ivx(boot, o);
  detail::add_window(boot, o);
  boot->add_option("--stat", o.stat, "statistic")->required();
  boot->add_option("--alpha", o.alphas, "sizes (comma list)")->delimiter(',');
  boot->add_option("--draws", o.draws, "bootstrap draws")->check(CLI::Range(99, 1000000));
  boot->add_option("--multiplier", o.multiplier, "normal|rademacher")->check(CLI::IsMember({"normal", "rademacher"}));
  boot->add_flag("--no-bootstrap-bias-correct", o.no_bootstrap_bias_correct, "use the OLS autoregression");

  auto add_mc = [&](CLI::App* sub) {
    detail::add_common(sub, o);
    detail::add_ivx(sub, o);
    detail::add_window(sub, o);
    sub->add_option("--preset", o.preset, "table1|table1a|table2|table2-cv12");
    sub->add_option("--stat", o.stat, "statistic");
    sub->add_option("--c", o.c_values, "persistence coefficients (comma list)")->delimiter(',');
    sub->add_option("--T", o.T_values, "sample sizes (comma list)")->delimiter(',');
    sub->add_option("--rho", o.rho_values, "innovation correlations (comma list)")->delimiter(',');
    sub->add_option("--reps", o.replications, "replications per cell")->check(CLI::PositiveNumber);
    sub->add_option("--alpha", o.alpha, "nominal size");
    sub->add_option("--cv", o.cv, "fixed critical value");
    sub->add_option("--cv-source", o.cv_source, "auto|fixed|chi2|simulated|bootstrap")
        ->check(CLI::IsMember({"auto", "fixed", "chi2", "simulated", "bootstrap"}));
    sub->add_option("--law-reps", o.reps, "limit-law draws for simulated critical values");
    sub->add_option("--n", o.steps, "limit-law discretization steps");
    sub->add_option("--persistence", o.persistence, "limit-law persistence class");
    sub->add_option("--law-c", o.law_c, "limit-law OU coefficient");
    sub->add_option("--draws", o.draws, "bootstrap draws per replication");
    sub->add_option("--multiplier", o.multiplier, "normal|rademacher")->check(CLI::IsMember({"normal", "rademacher"}));
    sub->add_flag("--no-bootstrap-bias-correct", o.no_bootstrap_bias_correct, "use the OLS autoregression");
    sub->add_option("--gamma", o.gamma, "regressor persistence exponent gamma_x");
    sub->add_option("--dgp-alpha", o.dgp_alpha, "intercept of the DGP");
    sub->add_option("--dgp-beta", o.dgp_beta, "slope of the DGP");
    sub->add_option("--intercept", o.intercept, "intercept policy of the samples")
        ->check(CLI::IsMember({"none", "stable", "unstable"}));
    sub->add_option("--cov", o.cov, "innovation covariance preset")->check(CLI::IsMember({"unit", "table2"}));
  };
  CLI::App* size = app.add_subcommand("mc-size", "Monte Carlo null rejection frequencies");
  add_mc(size);
  CLI::App* power = app.add_subcommand("mc-power", "Monte Carlo power against beta2 = beta1 + b/T");
  add_mc(power);
  power->add_option("--b", o.b, "local alternative offset")->required();
  power->add_option("--break-fraction", o.break_fraction, "true break fraction")->check(CLI::Range(0.0, 1.0));

  CLI::App* pc = app.add_subcommand("pc-diagnostic", "mean and 95% band of P_IVX(pi) and P_OLS(pi)");
  detail::add_common(pc, o);
  pc->add_option("--c", o.pc_c, "OU coefficient");
  pc->add_option("--pi", o.pi_grid, "break fractions (comma list)")->delimiter(',');
  pc->add_option("--reps", o.reps, "draws");
  pc->add_option("--n", o.steps, "discretization steps")->check(CLI::Range(2, 1000000));

  try {
    std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
    args = detail::merge_config(std::move(args));
    std::vector<const char*> cargs{argc > 0 ? argv[0] : "ivxlab"};
    for (const auto& a : args) cargs.push_back(a.c_str());
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*est) detail::cmd_estimate(est, o, out);
    else if (*test) detail::cmd_test(test, o, out);
    else if (*sim) detail::cmd_simulate_cv(sim, o, out);
    else if (*boot) detail::cmd_bootstrap_cv(boot, o, out);
    else if (*size) detail::cmd_mc(size, o, out, false);
    else if (*power) detail::cmd_mc(power, o, out, true);
    else if (*pc) detail::cmd_pc(pc, o, out);
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::out_of_range& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace cli

using cli::run_command;

}  // namespace ivxlab
