#include <gtest/gtest.h>

#include "critical_arm/verify.hpp"

using namespace critical_arm;

namespace {

void expect_all_pass(const std::vector<InequalityReport>& rows) {
  for (const auto& r : rows)
    EXPECT_TRUE(r.pass) << r.name << " " << r.instance << " lhs=" << r.left << " rhs=" << r.right;
}

}  // namespace

TEST(VerifySuite, ExactIdentitiesHold) {
  auto rows = run_exact_suite(20, 10, 10, 3);
  EXPECT_EQ(rows.size(), 40u);
  expect_all_pass(rows);
}

TEST(VerifySuite, ExactSuiteIsDeterministic) {
  auto a = run_exact_suite(5, 3, 3, 8), b = run_exact_suite(5, 3, 3, 8);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].instance, b[i].instance);
    EXPECT_EQ(a[i].left, b[i].left);
  }
}

TEST(VerifySuite, EntropyChecksHold) {
  auto rows = run_entropy_suite();
  EXPECT_EQ(rows.size(), 80u);
  expect_all_pass(rows);
}

TEST(VerifySuite, SamplerGatesAtModestSampleSize) {
  // statistical noise in TV at n samples is roughly sqrt(states / n); 2e5 keeps it well under the gate
  auto rows = run_sampler_suite(200000, 17);
  EXPECT_EQ(rows.size(), 7u);
  expect_all_pass(rows);
}

TEST(VerifySuite, ReportRowMargin) {
  auto r = report_row("x", 1, "i", 0.2, 0.5);
  EXPECT_DOUBLE_EQ(r.margin, 0.3);
  EXPECT_TRUE(r.pass);
  EXPECT_FALSE(report_row("x", 1, "i", 0.6, 0.5).pass);
}
