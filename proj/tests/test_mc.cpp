#include "ivxlab/mc.hpp"

#include <gtest/gtest.h>

using namespace ivxlab;

namespace {

McExperiment small_experiment(Index reps = 200) {
  McExperiment e = mc_preset("table1").experiment;
  e.c_values = {1.0, 10.0};
  e.T_values = {100};
  e.rho_values = {0.0, 0.9};
  e.replications = reps;
  e.seed = 70;
  return e;
}

}  // namespace

TEST(Presets, GridShapes) {
  const McPreset t1 = mc_preset("table1");
  EXPECT_EQ(t1.cv, 8.85);
  EXPECT_EQ(t1.experiment.c_values.size(), 4u);
  EXPECT_EQ(t1.experiment.T_values.size(), 4u);
  EXPECT_EQ(t1.experiment.rho_values.size(), 9u);
  EXPECT_EQ(t1.experiment.dgp.intercept, Intercept::none);
  EXPECT_EQ(mc_preset("table1a").experiment.c_values.front(), -1.0);
  const McPreset t2 = mc_preset("table2");
  EXPECT_EQ(t2.cv, 13.42);
  EXPECT_EQ(mc_preset("table2-cv12").cv, 12.0);
  EXPECT_FALSE(t2.experiment.config.fm_covariance);
  EXPECT_EQ(t2.experiment.config.delta_z, 0.75);
  EXPECT_THROW(mc_preset("table3"), std::invalid_argument);
}

TEST(Presets, Table2CovarianceKeepsTheVariances) {
  const InnovationCov cov = innovations_for(CovPreset::table2, -0.9, InnovationCov::bivariate(1, 1, 0));
  const Matrix S = cov.assemble();
  EXPECT_DOUBLE_EQ(S(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(S(1, 1), 0.75);
  EXPECT_NEAR(S(0, 1), -0.9 * std::sqrt(0.25 * 0.75), 1e-15);
}

TEST(SizeExperiment, CellsAreWellFormed) {
  const McTable t = run_size_experiment(small_experiment(), CvSource::fixed_value(8.85));
  ASSERT_EQ(t.cells.size(), 4u);
  for (const McCell& c : t.cells) {
    EXPECT_GE(c.rejection_rate, 0.0);
    EXPECT_LE(c.rejection_rate, 1.0);
    EXPECT_EQ(c.B, 200);
    EXPECT_EQ(c.failures, 0);
    EXPECT_NEAR(c.stderr_, std::sqrt(c.rejection_rate * (1 - c.rejection_rate) / 200.0), 1e-15);
    EXPECT_EQ(c.cv, 8.85);
    EXPECT_EQ(c.cv_source, "fixed");
    EXPECT_EQ(c.statistic, "sup-ols");
  }
}

TEST(SizeExperiment, IndependentOfWorkerCount) {
  setenv("IVXLAB_THREADS", "1", 1);
  const McTable a = run_size_experiment(small_experiment(150), CvSource::fixed_value(8.85));
  setenv("IVXLAB_THREADS", "4", 1);
  const McTable b = run_size_experiment(small_experiment(150), CvSource::fixed_value(8.85));
  unsetenv("IVXLAB_THREADS");
  for (std::size_t i = 0; i < a.cells.size(); ++i) EXPECT_EQ(a.cells[i].rejection_rate, b.cells[i].rejection_rate);
}

TEST(SizeExperiment, CellsDoNotDependOnTheRestOfTheGrid) {
  McExperiment one = small_experiment(150);
  one.c_values = {10.0};
  one.rho_values = {0.9};
  const McTable full = run_size_experiment(small_experiment(150), CvSource::fixed_value(8.85));
  const McTable single = run_size_experiment(one, CvSource::fixed_value(8.85));
  EXPECT_EQ(single.cells[0].rejection_rate, full.cells[3].rejection_rate);
}

TEST(SizeExperiment, RejectsAnAlternativeDgp) {
  McExperiment e = small_experiment();
  e.dgp.break_fraction = 0.5;
  e.dgp.beta2 = Vector::Constant(1, 1.0);
  EXPECT_THROW(run_size_experiment(e, CvSource::fixed_value(8.85)), std::invalid_argument);
}

TEST(SizeExperiment, Validation) {
  McExperiment e = small_experiment();
  e.dgp.beta1 = e.dgp.beta2 = Vector::Zero(2);
  e.dgp.persistence = PersistenceSpec(Vector::Ones(2), 1.0);
  EXPECT_THROW(e.validate(), std::invalid_argument);
  McExperiment w = small_experiment();
  w.statistic = StatisticKind::wald_ivx;
  EXPECT_THROW(run_size_experiment(w, CvSource::from_bootstrap({})), std::invalid_argument);
  McExperiment a = small_experiment();
  a.alpha = 0.0;
  EXPECT_THROW(a.validate(), std::invalid_argument);
}

TEST(SizeExperiment, TableSourceIsLookedUpAtAlpha) {
  CriticalValueTable t;
  t.statistic = "sup-nbb";
  t.replications = 1;
  t.quantiles = {{0.05, 8.85}};
  const McTable a = run_size_experiment(small_experiment(100), CvSource::from_table(t));
  const McTable b = run_size_experiment(small_experiment(100), CvSource::fixed_value(8.85));
  EXPECT_EQ(a.cells[0].rejection_rate, b.cells[0].rejection_rate);
  EXPECT_EQ(a.cells[0].cv_source, "simulated-limit");
  McExperiment e = small_experiment(100);
  e.alpha = 0.10;
  EXPECT_THROW(run_size_experiment(e, CvSource::from_table(t)), std::out_of_range);
}

TEST(PowerExperiment, ZeroAlternativeIsTheSizeExperiment) {
  const McExperiment e = small_experiment(150);
  const McTable size = run_size_experiment(e, CvSource::fixed_value(8.85));
  const McTable power = run_power_experiment(e, 0.0, CvSource::fixed_value(8.85));
  ASSERT_EQ(size.cells.size(), power.cells.size());
  for (std::size_t i = 0; i < size.cells.size(); ++i) EXPECT_EQ(size.cells[i].rejection_rate, power.cells[i].rejection_rate);
  EXPECT_EQ(power.monotone.size(), 4u);
}

TEST(PowerExperiment, LargeBreakIsDetected) {
  McExperiment e = small_experiment(200);
  e.c_values = {5.0};
  e.T_values = {500};
  e.rho_values = {0.0};
  e.dgp.intercept = Intercept::stable;
  for (StatisticKind k : {StatisticKind::sup_wald_ols, StatisticKind::sup_wald_ivx_beta}) {
    e.statistic = k;
    const McTable t = run_power_experiment(e, 100.0, CvSource::fixed_value(10.0));
    EXPECT_GT(t.cells[0].rejection_rate, 0.95) << to_string(k);
  }
}

TEST(PowerExperiment, PowerRisesWithTheBreakSize) {
  McExperiment e = small_experiment(300);
  e.c_values = {5.0};
  e.rho_values = {0.0};
  double prev = -1.0;
  for (double b : {0.0, 5.0, 15.0}) {
    const double r = run_power_experiment(e, b, CvSource::fixed_value(8.85)).cells[0].rejection_rate;
    EXPECT_GE(r, prev) << b;
    prev = r;
  }
}

TEST(PowerExperiment, MonotoneCheckFollowsTheTGrid) {
  McExperiment e = small_experiment(100);
  e.c_values = {5.0};
  e.rho_values = {0.0};
  e.T_values = {250, 100};
  const McTable t = run_power_experiment(e, 10.0, CvSource::fixed_value(8.85));
  ASSERT_EQ(t.monotone.size(), 1u);
  const double r100 = t.cells[1].rejection_rate, r250 = t.cells[0].rejection_rate;
  EXPECT_EQ(t.monotone[0].nondecreasing, r250 >= r100);
}
