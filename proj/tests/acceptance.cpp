// Acceptance run: one PASS/FAIL line per criterion. Tolerances and budgets are fixed below.
// Usage: acceptance [AC1 AC2 ...]   (default: all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "critical_arm.hpp"

using namespace critical_arm;

namespace {

constexpr std::uint64_t master_seed = 20240601;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string id;
  std::string title;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... xs) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, xs...);
  return buf;
}

double beta_c(int d) { return load_beta_c(default_beta_c_path()).at(d); }

McOptions mc(int chains, long sweeps, long burn_in, std::uint64_t seed) {
  McOptions o;
  o.chains = chains;
  o.sweeps = sweeps;
  o.burn_in = burn_in;
  o.seed = seed;
  return o;
}

Outcome count_failures(const std::vector<InequalityReport>& rows, double margin_floor) {
  std::size_t bad = 0;
  double worst = std::numeric_limits<double>::infinity();
  std::string where;
  for (const auto& r : rows) {
    if (r.margin < worst) {
      worst = r.margin;
      where = r.name + " " + r.instance;
    }
    if (!(r.margin >= margin_floor)) ++bad;
  }
  return {bad == 0, fmt("%zu checks, %zu failed, worst margin %.3g (%s)", rows.size(), bad, worst, where.c_str())};
}

// ---------------------------------------------------------------------------

Outcome ac1() {
  auto rows = run_exact_suite(200, 100, 100, master_seed);
  auto o = count_failures(rows, 0.0);
  std::size_t sw = 0;
  for (const auto& r : rows) sw += r.name == "switching";
  o.pass = o.pass && sw >= 100;
  o.detail += fmt("; ES tolerance %.0e, switching instances %zu at Nmax=8", verify::es_tolerance, sw);
  return o;
}

Outcome ac2() {
  auto rows = run_inequality_suite(inequality_names(), 1000, master_seed);
  auto o = count_failures(rows, -1e-10);
  o.pass = o.pass && rows.size() == 13 * 1000;
  o.detail += "; margin floor -1e-10";
  return o;
}

Outcome ac3() {
  auto rows = run_entropy_suite();
  auto o = count_failures(rows, 0.0);
  o.detail += "; derivative tolerance 1e-6, 2x2 and 2x3 boxes, 10-point grid";
  return o;
}

Outcome ac4() {
  auto rows = run_sampler_suite(1'000'000, master_seed);
  auto o = count_failures(rows, 0.0);
  double worst = 0;
  for (const auto& r : rows) worst = std::max(worst, r.left);
  o.detail = fmt("%zu gates at 1e6 samples, largest TV %.4f (limit %.2f); ", rows.size(), worst,
                 verify::tv_tolerance) +
             o.detail;
  return o;
}

Outcome ac5() {
  const double b = beta_c(2);
  std::vector<FitPoint> pts;
  std::string vals;
  for (int n : {8, 16, 32, 64}) {
    auto e = estimate_one_arm(2, n, n, b, Boundary::pinned, mc(4, 25000, -1, master_seed + n));
    pts.push_back({double(n), e.mean, e.se});
    vals += fmt(" %d:%.4f(%.4f)", n, e.mean, e.se);
  }
  auto f = fit_log_slope(pts);
  bool pass = std::abs(f.slope + 0.125) <= 0.05;
  return {pass, fmt("slope %.4f ± %.4f, target -0.125 ± 0.05; P[0<->dΛ_n] wired on Λ_n:%s", f.slope, f.slope_se,
                    vals.c_str())};
}

Outcome ac6() {
  const double b = beta_c(5);
  auto res = estimate_one_arm(5, 12, {2, 3, 4, 6}, b, Boundary::pinned, mc(2, 1800, 200, master_seed + 5));
  std::vector<FitPoint> pts;
  std::string vals;
  for (const auto& e : res.arm) {
    pts.push_back({double(e.params.m), e.mean, e.se});
    vals += fmt(" %d:%.4f(%.4f)", e.params.m, e.mean, e.se);
  }
  auto f = fit_log_slope(pts);
  bool pass = std::abs(f.slope + 1.0) <= 0.35;
  return {pass, fmt("slope %.3f ± %.3f, target -1.0 ± 0.35; wired Λ_12:%s", f.slope, f.slope_se, vals.c_str())};
}

void ac6_advisory() {
  auto line = [](const char* what, const std::vector<Estimate>& rows, double target) {
    std::vector<FitPoint> pts;
    std::string vals;
    for (const auto& e : rows) {
      pts.push_back({double(e.params.m), e.mean, e.se});
      vals += fmt(" %d:%.4g(%.2g)", e.params.m, e.mean, e.se);
    }
    try {
      auto f = fit_log_slope(pts);
      bool within = std::abs(f.slope - target) <= 0.6;
      std::printf("AC6-advisory %-6s %s: slope %.3f ± %.3f, target %.0f ± 0.6;%s\n", within ? "WITHIN" : "OUTSIDE",
                  what, f.slope, f.slope_se, target, vals.c_str());
    } catch (const std::exception& e) {
      std::printf("AC6-advisory NOFIT  %s: %s;%s\n", what, e.what(), vals.c_str());
    }
    std::fflush(stdout);
  };
  auto t0 = std::chrono::steady_clock::now();
  auto free7 = estimate_one_arm(7, 3, {1, 2, 3}, beta_c(7), Boundary::free, mc(2, 1000, 200, master_seed + 7));
  line("free one-arm d=7 Λ_3", free7.arm, -2.0);
  auto drc5 = drc_one_arm(5, 4, {1, 2, 3, 4}, beta_c(5), mc(2, 1000, 200, master_seed + 55));
  line("double-current one-arm d=5 Λ_4", drc5, -3.0);
  std::printf("AC6-advisory runtime %.0f s (no gate)\n", seconds_since(t0));
}

Outcome ac7() {
  const double b = beta_c(4);
  std::vector<FitPoint> pts;
  std::string vals;
  for (double h : {0.002, 0.005, 0.01, 0.02, 0.05}) {
    auto e = estimate_magnetisation(4, 12, b, h, mc(4, 1000, 300, master_seed + 4));
    pts.push_back({h, e.mean, e.se});
    vals += fmt(" %g:%.4f(%.4f)", h, e.mean, e.se);
  }
  auto f = fit_log_slope(pts);
  bool pass = std::abs(f.slope - 1.0 / 3.0) <= 0.1;
  return {pass, fmt("slope %.3f ± %.3f, target 1/3 ± 0.1; m(h) on Λ_12:%s", f.slope, f.slope_se, vals.c_str())};
}

Outcome ac8() {
  const double beta = 0.2;
  const int N = 6;
  auto g = build_box(3, N, false);
  std::vector<std::uint32_t> targets;
  for (auto c : std::vector<std::vector<int>>{{1, 0, 0}, {2, 0, 0}, {3, 0, 0}, {5, 0, 0}, {1, 1, 0},
                                              {2, 2, 0}, {1, 1, 1}, {2, 1, 1}, {3, 3, 3}, {0, -4, 2}})
    targets.push_back(g.index_of(c));
  auto drc = drc_two_point(3, N, beta, targets, mc(4, 50000, 500, master_seed + 8));
  auto two = estimate_two_point(3, N, beta, targets, mc(4, 50000, 500, master_seed + 9));
  double worst = 0;
  std::size_t bad = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    double G = two[i].mean;
    // binomial floor under the identity; a rare pair with no hits has zero empirical SE
    double floor = std::sqrt(G * G * (1 - G * G) / static_cast<double>(drc[i].nsamples));
    double se = std::hypot(std::max(drc[i].se, floor), 2 * G * two[i].se);
    double z = std::abs(drc[i].mean - G * G) / se;
    worst = std::max(worst, z);
    if (z > 4.0) ++bad;
  }
  return {bad == 0, fmt("10 pairs on Λ_6, β=0.2: max |P_drc − G²| / combined SE = %.2f (limit 4), %zu outside; "
                        "DRC SE floored at sqrt(G²(1−G²)/n)",
                        worst, bad)};
}

Outcome ac9() {
  auto rows = [](int threads) {
    std::vector<std::string> out;
    auto add = [&](const Estimate& e) {
      auto s = format_result_row(e);
      out.push_back(s.substr(0, s.rfind(',')));
    };
    auto o = mc(3, 200, 50, master_seed + 9);
    o.threads = threads;
    for (const auto& e : estimate_one_arm(3, 4, {1, 2, 4}, 0.2, Boundary::pinned, o).arm) add(e);
    add(estimate_magnetisation(3, 4, 0.2, 0.05, o));
    for (const auto& e : estimate_volume_tail(3, 4, 0.2, {2, 8}, o)) add(e);
    for (const auto& e : drc_one_arm(3, 3, {1, 3}, 0.2, o)) add(e);
    auto dg = diagrams(3, 2, 0.2, o, 4);
    add(Estimate{dg.triangle.value, dg.triangle.se, dg.triangle.nsamples, {}, o.seed, 0, {}});
    auto bc = estimate_beta_c(2, {4, 6}, {0.3, 0.4, 0.5, 0.6}, o, 3);
    add(Estimate{bc.beta_c, bc.half_width, 0, {}, o.seed, 0, {}});
    return out;
  };
  auto a = rows(1), b = rows(1), c = rows(3);
  std::size_t diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += (a[i] != b[i]) + (a[i] != c[i]);
  return {diff == 0 && a.size() == b.size() && a.size() == c.size(),
          fmt("%zu rows across onearm, magnetisation, volume, drc, diagrams, betac; rerun and 3-thread rerun: %zu "
              "differing rows",
              a.size(), diff)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> only(argv + 1, argv + argc);
  const std::vector<Criterion> all = {
      {"AC1", "exact identities", 120, ac1},
      {"AC2", "inequality suite, 13 checkers x 1000", 600, ac2},
      {"AC3", "entropy suite", 60, ac3},
      {"AC4", "sampler gates", 900, ac4},
      {"AC5", "d=2 wired one-arm exponent", 1800, ac5},
      {"AC6", "d=5 wired one-arm smoke test", 7200, ac6},
      {"AC7", "d=4 magnetisation exponent", 3600, ac7},
      {"AC8", "double-current connection identity", 1800, ac8},
      {"AC9", "determinism", 600, ac9},
  };
  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    double t = seconds_since(t0);
    bool in_time = t <= c.budget_s;
    bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s %s %s: %s [%.1f s, budget %.0f s%s]\n", c.id.c_str(), pass ? "PASS" : "FAIL", c.title.c_str(),
                o.detail.c_str(), t, c.budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
    if (c.id == "AC6") ac6_advisory();
  }
  std::printf("%d criteria failed\n", failed);
  return failed ? 1 : 0;
}
