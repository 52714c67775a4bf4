#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "critical_arm/exact_fk.hpp"
#include "critical_arm/exact_spin.hpp"
#include "critical_arm/swendsen_wang.hpp"
#include "oracles.hpp"

using namespace critical_arm;

namespace {

McOptions opts(long sweeps, int chains = 4, std::uint64_t seed = 7) {
  McOptions o;
  o.sweeps = sweeps;
  o.chains = chains;
  o.seed = seed;
  o.burn_in = 200;
  o.threads = 1;
  return o;
}

void expect_within(const Estimate& e, double exact, double k = 4.0) {
  EXPECT_NEAR(e.mean, exact, k * e.se + 1e-12) << "se=" << e.se;
}

// Exact probability of each spin configuration (bit v set: σ_v = −1).
std::vector<double> spin_law(const LatticeGraph& g, const CouplingSpec& s) {
  const std::size_t n = g.lattice_vertex_count();
  std::vector<double> p(std::size_t{1} << n);
  double Z = 0;
  for (std::uint64_t m = 0; m < p.size(); ++m) {
    double H = 0;
    auto sg = [&](std::uint32_t v) { return ((m >> v) & 1) ? -1.0 : 1.0; };
    for (std::size_t e = 0; e < g.lattice_edge_count(); ++e) H += s.coupling(e) * sg(g.edges()[e].u) * sg(g.edges()[e].v);
    for (std::uint32_t v = 0; v < n; ++v) H += s.total_field(v) * sg(v);
    p[m] = std::exp(H);
    Z += p[m];
  }
  for (auto& x : p) x /= Z;
  return p;
}

double tv(const std::vector<double>& a, const std::vector<double>& b) {
  double t = 0;
  for (std::size_t i = 0; i < a.size(); ++i) t += std::abs(a[i] - b[i]);
  return t / 2;
}

}  // namespace

TEST(Sweep, SpinLawTotalVariation) {
  for (auto sides : {std::vector<int>{2, 2}, std::vector<int>{2, 3}}) {
    auto g = LatticeGraph::rect(sides, {0, 0}, false);
    auto s = CouplingSpec::uniform(0.45, 0.1);
    auto exact = spin_law(g, s);
    SamplerState st(g, s, Rng(11));
    for (int i = 0; i < 100; ++i) sw_sweep(st);
    std::vector<double> emp(exact.size(), 0.0);
    const int T = 200000;
    for (int t = 0; t < T; ++t) {
      sw_sweep(st);
      std::uint64_t m = 0;
      for (std::uint32_t v = 0; v < st.spins.size(); ++v)
        if (st.spins[v] < 0) m |= std::uint64_t{1} << v;
      emp[m] += 1.0 / T;
    }
    EXPECT_LT(tv(emp, exact), 0.01);
  }
}

TEST(Sweep, FkMarginalTotalVariation) {
  for (auto sides : {std::vector<int>{2, 2}, std::vector<int>{2, 3}}) {
    auto g = LatticeGraph::rect(sides, {0, 0}, false);
    auto s = CouplingSpec::uniform(0.5);
    const std::size_t E = g.lattice_edge_count();
    std::vector<std::function<bool(const BondConfig&, UnionFind&)>> ev;
    for (std::uint32_t m = 0; m < (1u << E); ++m)
      ev.push_back([m, E](const BondConfig& b, UnionFind&) {
        for (std::size_t e = 0; e < E; ++e)
          if (b[e] != (((m >> e) & 1) != 0)) return false;
        return true;
      });
    auto exact = fk_event_probabilities(g, s, ev);
    SamplerState st(g, s, Rng(5));
    for (int i = 0; i < 100; ++i) sw_sweep(st);
    std::vector<double> emp(exact.size(), 0.0);
    const int T = 200000;
    for (int t = 0; t < T; ++t) {
      sw_sweep(st);
      std::uint32_t m = 0;
      for (std::size_t e = 0; e < E; ++e)
        if (st.bonds[e]) m |= 1u << e;
      emp[m] += 1.0 / T;
    }
    EXPECT_LT(tv(emp, exact), 0.015);
  }
}

TEST(Sweep, PinnedBoundaryKeepsPlus) {
  auto g = build_box(2, 2, false);
  SamplerState st(g, CouplingSpec::uniform(0.3, 0.0, Boundary::pinned), Rng(3));
  for (int i = 0; i < 200; ++i) {
    sw_sweep(st);
    for (auto v : g.boundary()) ASSERT_EQ(st.spins[v], 1);
  }
}

TEST(Sweep, MagnetisationWithPinnedAndField) {
  auto g = build_box(2, 1, false);
  auto s = CouplingSpec::uniform(0.3, 0.2, Boundary::free);
  double exact = oracle::ising(g, s, {g.origin()});
  SamplerState st(g, s, Rng(9));
  double acc = 0;
  const int T = 200000;
  for (int t = 0; t < T; ++t) {
    sw_sweep(st);
    acc += st.spins[g.origin()];
  }
  EXPECT_NEAR(acc / T, exact, 0.01);
}

TEST(ExtractFk, SingleEdgeOpenProbability) {
  auto g = LatticeGraph::rect({2}, {0}, false);
  auto s = CouplingSpec::uniform(0.6);
  Rng r(1);
  const int T = 200000;
  int open = 0;
  for (int t = 0; t < T; ++t) open += extract_fk(g, SpinConfig{1, 1}, s, r)[0];
  double p = bond_probability(0.6);
  EXPECT_NEAR(static_cast<double>(open) / T, p, 4 * std::sqrt(p * (1 - p) / T));
  EXPECT_FALSE(extract_fk(g, SpinConfig{1, -1}, s, r)[0]);
  EXPECT_THROW(extract_fk(g, SpinConfig{1}, s, r), ValidationError);
}

TEST(ArmProbe, RadiusOfSpiral) {
  auto g = build_box(2, 3, false);
  BondConfig b(g.edge_count());
  // path 0 → (1,0) → (1,1) → (2,1)
  auto v = [&](int x, int y) { return g.index_of({x, y}); };
  b.set(g.edge_between(v(0, 0), v(1, 0)), true);
  b.set(g.edge_between(v(1, 0), v(1, 1)), true);
  b.set(g.edge_between(v(1, 1), v(2, 1)), true);
  ArmProbe probe(g);
  EXPECT_EQ(probe.radius(b, 3), 2);
  EXPECT_EQ(probe.radius(b, 1), 1);
  EXPECT_TRUE(one_arm(g, b, 2));
  EXPECT_FALSE(one_arm(g, b, 3));
}

TEST(OneArm, TrivialCouplings) {
  auto o = opts(200, 2);
  EXPECT_EQ(estimate_one_arm(2, 3, 1, 0.0, Boundary::free, o).mean, 0.0);
  EXPECT_EQ(estimate_one_arm(2, 3, 0, 0.0, Boundary::free, o).mean, 1.0);
  EXPECT_EQ(estimate_one_arm(2, 3, 3, 30.0, Boundary::free, o).mean, 1.0);
}

TEST(OneArm, FreeMatchesExactSmallBox) {
  auto g = build_box(2, 1, false);
  const double beta = 0.4;
  double exact = fk_event_probability(g, beta, Boundary::free,
                                      [&](const BondConfig& b, UnionFind&) { return one_arm(g, b, 1); });
  expect_within(estimate_one_arm(2, 1, 1, beta, Boundary::free, opts(40000)), exact);
}

TEST(OneArm, WiredEqualsPinnedMagnetisation) {
  auto g = build_box(2, 2, false);
  const double beta = 0.35;
  double exact = spin_expectation(g, CouplingSpec::uniform(beta, 0.0, Boundary::pinned), {g.origin()});
  auto r = estimate_one_arm(2, 2, std::vector<int>{1, 2}, beta, Boundary::pinned, opts(40000));
  expect_within(r.arm[1], exact);
  ASSERT_TRUE(r.magnetisation.has_value());
  expect_within(*r.magnetisation, exact);
  EXPECT_GE(r.arm[0].mean, r.arm[1].mean);
  EXPECT_EQ(r.arm[0].params.bc, "wired");
}

TEST(OneArm, IncreasesWithBeta) {
  auto lo = estimate_one_arm(2, 4, 4, 0.3, Boundary::free, opts(4000));
  auto hi = estimate_one_arm(2, 4, 4, 0.5, Boundary::free, opts(4000));
  EXPECT_GT(hi.mean - lo.mean, 4 * std::hypot(hi.se, lo.se));
}

TEST(OneArm, DeterministicAcrossThreadCounts) {
  auto a = opts(500, 3);
  auto b = a;
  b.threads = 3;
  auto ea = estimate_one_arm(2, 5, 3, 0.44, Boundary::free, a);
  auto eb = estimate_one_arm(2, 5, 3, 0.44, Boundary::free, b);
  EXPECT_EQ(ea.mean, eb.mean);
  EXPECT_EQ(ea.se, eb.se);
}

TEST(OneArm, AutomaticBurnIn) {
  auto o = opts(300, 2);
  o.burn_in = -1;
  auto e = estimate_one_arm(2, 3, 2, 0.44, Boundary::free, o);
  EXPECT_EQ(e.nsamples, 600u);
  EXPECT_GT(e.mean, 0.0);
}

TEST(OneArm, RejectsBadArguments) {
  auto o = opts(10, 1);
  EXPECT_THROW(estimate_one_arm(2, 3, 4, 0.4, Boundary::free, o), ValidationError);
  EXPECT_THROW(estimate_one_arm(2, 3, 1, 0.4, Boundary::plus, o), ValidationError);
  EXPECT_THROW(estimate_one_arm(2, 3, 1, -0.1, Boundary::free, o), ValidationError);
  EXPECT_THROW(estimate_one_arm(0, 3, 1, 0.4, Boundary::free, o), ValidationError);
  o.chains = 0;
  EXPECT_THROW(estimate_one_arm(2, 3, 1, 0.4, Boundary::free, o), ValidationError);
}

TEST(Magnetisation, StrongFieldSaturates) {
  auto e = estimate_magnetisation(2, 2, 0.1, 5.0, opts(2000));
  EXPECT_GT(e.mean, 0.99);
}

TEST(Magnetisation, MatchesExactSmallBox) {
  auto g = build_box(2, 1, false);
  double exact = spin_expectation(g, CouplingSpec::uniform(0.3, 0.15), {g.origin()});
  expect_within(estimate_magnetisation(2, 1, 0.3, 0.15, opts(40000)), exact);
  EXPECT_THROW(estimate_magnetisation(2, 1, 0.3, -1.0, opts(10)), ValidationError);
}

TEST(VolumeTail, MatchesExactSmallBox) {
  auto g = build_box(2, 1, false);
  const double beta = 0.4;
  double exact = fk_event_probability(g, beta, Boundary::free,
                                      [&](const BondConfig&, UnionFind& uf) { return uf.component_size(g.origin()) >= 3; });
  auto r = estimate_volume_tail(2, 1, beta, {1, 3}, opts(40000));
  EXPECT_EQ(r[0].mean, 1.0);
  expect_within(r[1], exact);
  EXPECT_THROW(estimate_volume_tail(2, 1, beta, {3, 2}, opts(10)), ValidationError);
  EXPECT_THROW(estimate_volume_tail(2, 1, beta, {0}, opts(10)), ValidationError);
}

TEST(EdgeInfluence, MatchesExactSmallBox) {
  const double beta = 0.4;
  auto g = build_box(2, 2, false);
  const double p = bond_probability(beta);
  std::vector<std::vector<std::uint32_t>> sets;
  auto r = estimate_edge_influence(2, 2, beta, opts(20000));
  for (auto e : r.edges) sets.push_back({g.edges()[e].u, g.edges()[e].v});
  auto wired = spin_expectations(g, CouplingSpec::uniform(beta, 0.0, Boundary::pinned), sets);
  auto freeb = spin_expectations(g, CouplingSpec::uniform(beta), sets, 25);
  ASSERT_EQ(r.edges.size(), 12u);
  double best = -1;
  for (std::size_t i = 0; i < r.edges.size(); ++i) {
    double exact = p * (1 + wired[i]) / 2 - p * (1 + freeb[i]) / 2;
    EXPECT_GT(exact, 0.0);
    expect_within(r.per_edge[i], exact);
    best = std::max(best, exact);
  }
  expect_within(r.sup, best, 5.0);
}
