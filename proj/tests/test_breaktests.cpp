#include "fixtures.hpp"
#include "ivxlab/breaktests.hpp"

#include <gtest/gtest.h>

using namespace ivxlab;
using namespace fixture;

namespace {

const BreakWindow kNarrow{0.25, 0.75};
// Regimes of three observations leave the autoregression with no residual
// variation, so the IVX scans keep four on each side.
const BreakWindow kIvxNarrow{0.34, 0.66};

IvxConfig sandwich_config() {
  IvxConfig c;
  c.fm_covariance = false;
  c.restart_regime_instruments = false;
  return c;
}

}  // namespace

TEST(WaldIvx, MatchesOracle) {
  for (Intercept pol : {Intercept::stable, Intercept::none}) {
    for (std::uint64_t seed : {21u, 22u, 23u}) {
      const Sample s = fixed_sample(12, 1, pol, seed);
      const double w = wald_ivx_full(s, IvxConfig{});
      const double o = oracle::wald_ivx(to_vec(s.y()), to_vec(s.X().col(0)), pol != Intercept::none, 1.0, 0.95, 1.0);
      EXPECT_LT(rel_err(w, o), 1e-10) << to_string(pol) << " seed " << seed;
    }
  }
}

TEST(WaldIvx, ZeroTargetGivesZero) {
  const Sample s = fixed_sample(50, 2, Intercept::stable, 24).with_y(Vector::Zero(50));
  EXPECT_EQ(wald_ivx_full(s, IvxConfig{}), 0.0);
}

TEST(WaldIvx, SingularRestrictionIsReported) {
  const Sample s = fixed_sample(60, 2, Intercept::stable, 25);
  Matrix R(2, 2);
  R << 1, 0, 1, 0;
  try {
    wald_ivx_full(s, IvxConfig{}, R, Vector::Ones(2));
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("singular"), std::string::npos);
  }
  EXPECT_THROW(wald_ivx_full(s, IvxConfig{}, Matrix::Ones(1, 3), Vector::Zero(1)), std::invalid_argument);
}

TEST(SupWaldOls, MatchesChowOracleEveryCandidate) {
  struct Case {
    Intercept pol;
    std::size_t first;
  };
  for (const Case c : {Case{Intercept::none, 0}, Case{Intercept::stable, 0}, Case{Intercept::unstable, 1}}) {
    const Sample s = fixed_sample(12, 1, c.pol, 26);
    const WaldScan scan = sup_wald_ols(s, kNarrow);
    ASSERT_EQ(scan.grid.front(), 3);
    ASSERT_EQ(scan.grid.back(), 9);
    for (std::size_t g = 0; g < scan.grid.size(); ++g) {
      const double o = oracle::ols_break_at(to_vec(s.y()), to_mat(s.X()), c.pol != Intercept::none, c.first,
                                            static_cast<std::size_t>(scan.grid[g]));
      EXPECT_LT(rel_err(scan.values[g], o), 1e-10) << to_string(c.pol) << " t=" << scan.grid[g];
    }
  }
}

TEST(SupWaldOls, TwoPredictorOracle) {
  const Sample s = fixed_sample(16, 2, Intercept::stable, 27);
  const WaldScan scan = sup_wald_ols(s, kNarrow);
  for (std::size_t g = 0; g < scan.grid.size(); ++g)
    EXPECT_LT(rel_err(scan.values[g], oracle::ols_break_at(to_vec(s.y()), to_mat(s.X()), true, 0, scan.grid[g])), 1e-9);
}

TEST(SupWaldIvx, SlopeAndInterceptMatchOracle) {
  for (Intercept pol : {Intercept::stable, Intercept::none}) {
    const Sample s = fixed_sample(12, 1, pol, 28);
    const IvxConfig c;
    const IvxBreakScan scan = ivx_break_scan(s, kIvxNarrow, c, true);
    ASSERT_EQ(scan.grid.front(), 4);
    ASSERT_EQ(scan.grid.back(), 8);
    for (std::size_t g = 0; g < scan.grid.size(); ++g) {
      const oracle::BreakPair o = oracle::ivx_break_at(to_vec(s.y()), to_vec(s.X().col(0)), pol != Intercept::none, 1.0,
                                                       0.95, 1.0, scan.grid[g]);
      EXPECT_LT(rel_err(scan.w_beta[g], o.w_beta), 1e-10) << "t=" << scan.grid[g];
      if (pol != Intercept::none) {
        EXPECT_LT(rel_err(scan.w_alpha[g], o.w_alpha), 1e-10) << "t=" << scan.grid[g];
        EXPECT_LT(rel_err(wald_ivx_alpha(s, scan.grid[g], c), o.w_alpha), 1e-10);
      }
    }
  }
}

TEST(SupWaldIvx, SandwichFormMatchesOracle) {
  const Sample s = fixed_sample(12, 1, Intercept::stable, 29);
  const WaldScan scan = sup_wald_ivx_beta(s, kNarrow, sandwich_config());
  for (std::size_t g = 0; g < scan.grid.size(); ++g) {
    const double o = oracle::ivx_sandwich_break_at(to_vec(s.y()), to_vec(s.X().col(0)), 1.0, 0.95, scan.grid[g]);
    EXPECT_LT(rel_err(scan.values[g], o), 1e-10) << "t=" << scan.grid[g];
  }
}

TEST(SupWaldIvx, InterceptTestNeedsAnIntercept) {
  const Sample s = fixed_sample(40, 1, Intercept::none, 30);
  EXPECT_THROW(sup_wald_ivx_alpha(s, BreakWindow{}, IvxConfig{}), std::invalid_argument);
  EXPECT_THROW(wald_ivx_alpha(fixed_sample(40, 1, Intercept::stable, 30), 2, IvxConfig{}), std::invalid_argument);
}

TEST(JointTests, ComposeFromTheirParts) {
  const Sample s = fixed_sample(12, 1, Intercept::stable, 31);
  const IvxConfig c;
  const double full = oracle::wald_ivx(to_vec(s.y()), to_vec(s.X().col(0)), true, 1.0, 0.95, 1.0);
  double best_beta = -1.0, best_total = -1.0;
  for (Index t = 4; t <= 8; ++t) {
    const oracle::BreakPair o = oracle::ivx_break_at(to_vec(s.y()), to_vec(s.X().col(0)), true, 1.0, 0.95, 1.0, t);
    best_beta = std::max(best_beta, o.w_beta);
    best_total = std::max(best_total, full + o.w_alpha + o.w_beta);
  }
  const JointResult jb = joint_wald_beta(s, kIvxNarrow, c);
  const JointResult jab = joint_wald_alpha_beta(s, kIvxNarrow, c);
  EXPECT_LT(rel_err(jb.full_sample, full), 1e-10);
  EXPECT_LT(rel_err(jb.value, full + best_beta), 1e-10);
  EXPECT_LT(rel_err(jab.value, best_total), 1e-10);
}

TEST(AllStatistics, ZeroTargetGivesZero) {
  const Sample s = fixed_sample(60, 1, Intercept::stable, 32).with_y(Vector::Zero(60));
  for (StatisticKind k : {StatisticKind::wald_ivx, StatisticKind::sup_wald_ols, StatisticKind::sup_wald_ivx_beta,
                          StatisticKind::sup_wald_ivx_alpha, StatisticKind::joint_beta, StatisticKind::joint_alpha_beta})
    EXPECT_EQ(compute_statistic(k, s, BreakWindow{}, IvxConfig{}).value, 0.0) << to_string(k);
}

TEST(AllStatistics, InvariantToScalingTheTarget) {
  const Sample s = fixed_sample(120, 2, Intercept::stable, 33);
  const Sample scaled = s.with_y(3.0 * s.y());
  for (const IvxConfig& c : {IvxConfig{}, sandwich_config()})
    for (StatisticKind k : {StatisticKind::wald_ivx, StatisticKind::sup_wald_ols, StatisticKind::sup_wald_ivx_beta,
                            StatisticKind::sup_wald_ivx_alpha, StatisticKind::joint_beta, StatisticKind::joint_alpha_beta}) {
      const double a = compute_statistic(k, s, BreakWindow{}, c).value;
      const double b = compute_statistic(k, scaled, BreakWindow{}, c).value;
      EXPECT_LT(std::abs(a - b), 1e-8 * std::max(1.0, a)) << to_string(k);
    }
}

TEST(AllStatistics, SupDominatesEveryCandidate) {
  const Sample s = fixed_sample(150, 1, Intercept::stable, 34);
  for (StatisticKind k : {StatisticKind::sup_wald_ols, StatisticKind::sup_wald_ivx_beta, StatisticKind::sup_wald_ivx_alpha}) {
    const StatisticValue v = compute_statistic(k, s, BreakWindow{}, IvxConfig{});
    ASSERT_TRUE(v.scan.has_value());
    for (double w : v.scan->values) {
      EXPECT_GE(w, 0.0);
      EXPECT_LE(w, v.value);
    }
    EXPECT_TRUE(std::find(v.scan->grid.begin(), v.scan->grid.end(), v.scan->argmax_index) != v.scan->grid.end());
  }
}

TEST(BreakLocation, LargeSlopeBreakIsFoundNearItsDate) {
  DgpParams d = DgpParams::stable_system(0.0, Vector::Constant(1, 0.0), PersistenceSpec(Vector::Constant(1, 5.0), 1.0),
                                         InnovationCov::bivariate(1.0, 1.0, 0.0), Intercept::stable);
  d.beta2 = Vector::Constant(1, 0.8);
  d.break_fraction = 0.5;
  const Sample s = simulate_sample(d, 500, 35);
  for (const IvxConfig& c : {IvxConfig{}, sandwich_config()}) {
    const TestReport r = run_test(StatisticKind::sup_wald_ivx_beta, s, BreakWindow{}, c, 8.85, 0.05);
    EXPECT_TRUE(r.reject);
    ASSERT_TRUE(r.break_fraction.has_value());
    EXPECT_NEAR(*r.break_fraction, 0.5, 0.05);
  }
  const TestReport ols = run_test(StatisticKind::sup_wald_ols, s, BreakWindow{}, IvxConfig{}, 8.85, 0.05);
  EXPECT_NEAR(*ols.break_fraction, 0.5, 0.05);
}

TEST(BreakLocation, ScanIsIndependentOfWorkerCount) {
  const Sample s = fixed_sample(200, 2, Intercept::stable, 36);
  setenv("IVXLAB_THREADS", "1", 1);
  const IvxBreakScan a = ivx_break_scan(s, BreakWindow{}, IvxConfig{}, true);
  setenv("IVXLAB_THREADS", "4", 1);
  const IvxBreakScan b = ivx_break_scan(s, BreakWindow{}, IvxConfig{}, true);
  unsetenv("IVXLAB_THREADS");
  EXPECT_EQ(a.w_beta, b.w_beta);
  EXPECT_EQ(a.w_alpha, b.w_alpha);
}

// Under the null with a mildly integrated regressor the full-sample statistic
// is chi-squared with one degree of freedom.
TEST(WaldIvx, NullRejectionNearNominal) {
  DgpParams d = DgpParams::stable_system(0.0, Vector::Zero(1), PersistenceSpec(Vector::Constant(1, 5.0), 1.0),
                                         InnovationCov::bivariate(1.0, 1.0, -0.5), Intercept::stable);
  int rejections = 0;
  const int reps = 1000;
  for (int r = 0; r < reps; ++r)
    if (wald_ivx_full(simulate_sample(d, 500, derive_seed(37, {static_cast<std::uint64_t>(r)})), IvxConfig{}) > 3.841459)
      ++rejections;
  EXPECT_NEAR(rejections / static_cast<double>(reps), 0.05, 0.025);
}
