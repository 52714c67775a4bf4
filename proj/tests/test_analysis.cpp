#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "critical_arm/analysis.hpp"
#include "critical_arm/rng.hpp"

using namespace critical_arm;

namespace {

McOptions opts(long sweeps, std::uint64_t seed = 5) {
  McOptions o;
  o.chains = 4;
  o.sweeps = sweeps;
  o.burn_in = 300;
  o.seed = seed;
  o.threads = 1;
  return o;
}

Estimate row(std::string obs, int d, std::string bc, int m, double h, double mean, double se, int N = 10) {
  Estimate e;
  e.params = {std::move(obs), d, N, m, 0.2, h, std::move(bc)};
  e.mean = mean;
  e.se = se;
  e.nsamples = 100;
  return e;
}

ExponentCheck check(std::string obs, int d, std::string bc, double tol = 0.1) {
  ExponentCheck c;
  c.observable = std::move(obs);
  c.d = d;
  c.bc = std::move(bc);
  c.tolerance = tol;
  return c;
}

}  // namespace

TEST(FitLogSlope, ExactPowerLaw) {
  std::vector<FitPoint> pts;
  for (double x : {2.0, 4.0, 8.0, 16.0}) pts.push_back({x, 3.0 / (x * x), 0.0});
  auto f = fit_log_slope(pts);
  EXPECT_NEAR(f.slope, -2.0, 1e-12);
  EXPECT_NEAR(f.slope_se, 0.0, 1e-9);
  EXPECT_NEAR(std::exp(f.intercept), 3.0, 1e-10);
  EXPECT_FALSE(f.weighted);
  EXPECT_EQ(f.npoints, 4u);
  EXPECT_EQ(f.x_min, 2.0);
  EXPECT_EQ(f.x_max, 16.0);
}

TEST(FitLogSlope, ConstantHasZeroSlope) {
  auto f = fit_log_slope({{1, 0.5, 0.01}, {2, 0.5, 0.01}, {3, 0.5, 0.01}});
  EXPECT_NEAR(f.slope, 0.0, 1e-12);
  EXPECT_TRUE(f.weighted);
  EXPECT_NEAR(f.chi2_dof, 0.0, 1e-20);
}

TEST(FitLogSlope, WeightedSlopeErrorMatchesRelativeErrors) {
  // equal relative errors r at x = 1, e, e²: Var(slope) = r² / Σ(X − X̄)² = r² / 2
  const double r = 0.05;
  std::vector<FitPoint> pts;
  for (int k = 0; k < 3; ++k) {
    double x = std::exp(k), y = std::pow(x, 0.7);
    pts.push_back({x, y, r * y});
  }
  auto f = fit_log_slope(pts);
  EXPECT_NEAR(f.slope, 0.7, 1e-12);
  EXPECT_NEAR(f.slope_se, r / std::sqrt(2.0), 1e-12);
}

TEST(FitLogSlope, NoisyPointsCoverTrueSlope) {
  Rng rng = Rng::stream(99, 0);
  int covered = 0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    std::vector<FitPoint> pts;
    for (double x : {2.0, 3.0, 5.0, 8.0, 13.0}) {
      double y = 0.8 * std::pow(x, -1.5);
      double se = 0.03 * y;
      // normal via Box-Muller
      double u1 = rng.uniform(), u2 = rng.uniform();
      double z = std::sqrt(-2 * std::log(1 - u1)) * std::cos(2 * M_PI * u2);
      pts.push_back({x, y * std::exp(0.03 * z), se});
    }
    auto f = fit_log_slope(pts);
    if (std::abs(f.slope + 1.5) <= 2 * f.slope_se) ++covered;
  }
  // nominal coverage of ±2σ is 95.4%
  EXPECT_GT(covered, trials * 0.92);
  EXPECT_LT(covered, trials * 0.99);
}

TEST(FitLogSlope, InvariantUnderRescaling) {
  std::vector<FitPoint> a{{2, 0.3, 0.01}, {4, 0.2, 0.02}, {8, 0.12, 0.005}, {16, 0.05, 0.004}};
  auto b = a;
  for (auto& p : b) {
    p.mean *= 7;
    p.se *= 7;
  }
  auto fa = fit_log_slope(a), fb = fit_log_slope(b);
  EXPECT_NEAR(fa.slope, fb.slope, 1e-12);
  EXPECT_NEAR(fa.slope_se, fb.slope_se, 1e-12);
  EXPECT_NEAR(fa.chi2_dof, fb.chi2_dof, 1e-10);
}

TEST(FitLogSlope, Errors) {
  EXPECT_THROW(fit_log_slope({{1, 1, 0}, {2, 1, 0}}), ValidationError);
  EXPECT_THROW(fit_log_slope({{1, 1, 0}, {2, 0, 0}, {3, 1, 0}}), NonPositiveMeanError);
  EXPECT_THROW(fit_log_slope({{1, 1, 0}, {2, -1e-3, 0}, {3, 1, 0}}), NonPositiveMeanError);
  EXPECT_THROW(fit_log_slope({{2, 1, 0.1}, {2, 2, 0.1}, {2, 3, 0.1}}), ValidationError);
}

TEST(FitLogSlope, AutoRangeDropsSmallScales) {
  std::vector<FitPoint> pts;
  for (double x : {1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
    double y = std::pow(x, -1.0) * (1 + (x < 3 ? 0.5 / x : 0.0));
    pts.push_back({x, y, 0.001 * y});
  }
  auto f = fit_log_slope_auto(pts);
  EXPECT_NEAR(f.slope, -1.0, 1e-9);
  EXPECT_EQ(f.x_min, 4.0);
}

TEST(Binder, InfiniteTemperatureValue) {
  auto b = binder_cumulant(2, 4, 0.0, opts(50));
  EXPECT_NEAR(b.U, 2.0 / (3.0 * 16.0), 1e-12);
  EXPECT_NEAR(b.m2, 1.0 / 16.0, 1e-12);
}

TEST(Binder, ApproachesTwoThirdsDeepInOrderedPhase) {
  auto b = binder_cumulant(2, 6, 1.0, opts(500));
  EXPECT_NEAR(b.U, 2.0 / 3.0, 1e-3);
}

TEST(BetaC, SquareLatticeCrossingNearOnsager) {
  auto r = estimate_beta_c(2, {4, 8}, {0.36, 0.40, 0.44, 0.48, 0.52}, opts(3000), 5);
  ASSERT_EQ(r.crossings.size(), 1u);
  EXPECT_NEAR(r.beta_c, 0.4406868, 0.03);
  EXPECT_GT(r.half_width, 0.0);
  EXPECT_LE(r.crossings[0].lo, r.beta_c);
  EXPECT_GE(r.crossings[0].hi, r.beta_c);
}

TEST(BetaC, DisorderedGridHasNoCrossing) {
  EXPECT_THROW(estimate_beta_c(2, {4, 8}, {0.1, 0.15, 0.2}, opts(500)), NoCrossingError);
  EXPECT_THROW(estimate_beta_c(2, {4}, {0.1, 0.15, 0.2}, opts(10)), ValidationError);
  EXPECT_THROW(estimate_beta_c(2, {4, 8}, {0.1, 0.2}, opts(10)), ValidationError);
}

TEST(PredictedExponent, Table) {
  EXPECT_EQ(predicted_exponent("one_arm", 2, "free"), -0.125);
  EXPECT_EQ(predicted_exponent("one_arm", 5, "wired"), -1.0);
  EXPECT_EQ(predicted_exponent("one_arm", 4, "free"), -1.0);
  EXPECT_EQ(predicted_exponent("one_arm", 7, "free"), -2.0);
  EXPECT_FALSE(predicted_exponent("one_arm", 5, "free").has_value());
  EXPECT_FALSE(predicted_exponent("one_arm", 3, "wired").has_value());
  EXPECT_EQ(predicted_exponent("drc_one_arm", 5, "free"), -3.0);
  EXPECT_NEAR(*predicted_exponent("magnetisation", 4, "plus"), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(predicted_exponent("volume_tail", 6, "free"), -0.5);
  EXPECT_FALSE(predicted_exponent("volume_tail", 5, "free").has_value());
}

TEST(ExponentReport, FitsFilteredRows) {
  std::vector<Estimate> t;
  for (int m : {2, 4, 8, 16}) t.push_back(row("one_arm", 5, "wired", m, 0, 1.0 / m, 0.001 / m));
  t.push_back(row("one_arm", 5, "free", 2, 0, 0.7, 0.01));
  for (double h : {0.001, 0.008, 0.064}) t.push_back(row("magnetisation", 4, "plus", 0, h, std::cbrt(h), 1e-4));
  auto rows = exponent_report(t, {check("one_arm", 5, "wired"), check("magnetisation", 4, "plus", 0.05)});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(rows[0].fit.slope, -1.0, 1e-10);
  EXPECT_TRUE(rows[0].pass);
  EXPECT_NEAR(rows[1].fit.slope, 1.0 / 3.0, 1e-9);
  EXPECT_TRUE(rows[1].pass);
  std::ostringstream md, csv;
  write_report_markdown(md, rows);
  write_report_csv(csv, rows);
  EXPECT_NE(md.str().find("| one_arm | 5 | wired |"), std::string::npos);
  EXPECT_NE(csv.str().find("magnetisation,4,plus,"), std::string::npos);
}

TEST(ExponentReport, FailsOutsideTolerance) {
  std::vector<Estimate> t;
  for (int m : {2, 4, 8}) t.push_back(row("one_arm", 6, "free", m, 0, std::pow(m, -1.5), 1e-4));
  auto rows = exponent_report(t, {check("one_arm", 6, "free")});
  EXPECT_FALSE(rows[0].pass);
  auto c = check("one_arm", 6, "free");
  c.predicted = -1.5;
  EXPECT_TRUE(exponent_report(t, {c})[0].pass);
}

TEST(ExponentReport, MissingRows) {
  std::vector<Estimate> t{row("one_arm", 5, "wired", 2, 0, 0.5, 0.01), row("one_arm", 5, "wired", 4, 0, 0.25, 0.01)};
  EXPECT_THROW(exponent_report(t, {check("one_arm", 5, "wired")}), MissingRowError);
  EXPECT_THROW(exponent_report(t, {check("drc_one_arm", 5, "free")}), MissingRowError);
}
