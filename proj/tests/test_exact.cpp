#include <gtest/gtest.h>

#include <cmath>

#include "critical_arm/cluster_law.hpp"
#include "critical_arm/exact_current.hpp"
#include "critical_arm/exact_fk.hpp"
#include "critical_arm/exact_spin.hpp"
#include "oracles.hpp"

using namespace critical_arm;

namespace {
LatticeGraph rect(std::vector<int> s, std::vector<int> o, bool ghost = false) { return LatticeGraph::rect(s, o, ghost); }
}  // namespace

TEST(ExactSpin, SingleEdgeIsTanh) {
  auto g = rect({2}, {0});
  EXPECT_NEAR(spin_expectation(g, CouplingSpec::uniform(1.0), {0, 1}), std::tanh(1.0), 1e-14);
  EXPECT_NEAR(spin_expectation(g, CouplingSpec::uniform(1.0), {0}), 0.0, 1e-14);
}

TEST(ExactSpin, SingleSiteFieldIsTanh) {
  auto g = rect({1}, {0});
  EXPECT_NEAR(spin_expectation(g, CouplingSpec::uniform(0.0, 0.3), {0}), std::tanh(0.3), 1e-14);
}

TEST(ExactSpin, PathCorrelationIsProductOfTanh) {
  auto g = rect({5}, {2});
  CouplingSpec s;
  s.J = {0.2, 0.5, 0.9, 1.1};
  IsingTable t(g, s);
  EXPECT_NEAR(t.two(0, 4), std::tanh(0.2) * std::tanh(0.5) * std::tanh(0.9) * std::tanh(1.1), 1e-13);
}

TEST(ExactSpin, MatchesNaiveOracle) {
  auto g = rect({3, 3}, {1, 1});
  CouplingSpec s;
  s.J.resize(g.lattice_edge_count());
  s.h.resize(g.lattice_vertex_count());
  for (std::size_t e = 0; e < s.J.size(); ++e) s.J[e] = 0.1 + 0.07 * e;
  for (std::size_t x = 0; x < s.h.size(); ++x) s.h[x] = 0.05 * x;
  IsingTable t(g, s);
  for (std::vector<std::uint32_t> A : {std::vector<std::uint32_t>{4}, {0, 8}, {1, 3, 5}, {0, 2, 6, 8}})
    EXPECT_NEAR(t.expect(A), oracle::ising(g, s, A), 1e-12);
}

TEST(ExactSpin, PinnedMatchesNaiveOracle) {
  auto g = rect({3, 4}, {1, 1});
  auto s = CouplingSpec::uniform(0.4, 0.0, Boundary::pinned);
  IsingTable t(g, s);
  EXPECT_EQ(t.enumerator().free_count(), 2u);
  for (std::uint32_t v = 0; v < g.lattice_vertex_count(); ++v) EXPECT_NEAR(t.one(v), oracle::ising(g, s, {v}), 1e-12);
}

TEST(ExactSpin, PlusBoundaryEqualsLargerPinnedBox) {
  // Exterior couplings β to +1 spins on Λ_1 equal the pinned law on Λ_2 restricted to Λ_1
  // only when the outer ring is fully pinned with the same couplings.
  auto small = build_box(2, 1, false);
  auto big = build_box(2, 2, false);
  double beta = 0.35;
  auto plus = CouplingSpec::plus(small, {beta}, {0.0}, beta);
  auto pinned = CouplingSpec::uniform(beta, 0.0, Boundary::pinned);
  EXPECT_NEAR(spin_expectation(small, plus, {small.origin()}), spin_expectation(big, pinned, {big.origin()}), 1e-12);
}

TEST(ExactSpin, BudgetIsEnforced) {
  auto g = build_box(2, 2, false);
  EXPECT_THROW(IsingTable(g, CouplingSpec::uniform(0.3)), BudgetError);
}

TEST(ExactSpin, RejectsNegativeCoupling) {
  auto g = rect({2}, {0});
  EXPECT_THROW(spin_expectation(g, CouplingSpec::uniform(-0.1), {0, 1}), ValidationError);
}

TEST(ExactFk, MatchesNaiveOracle) {
  auto g = rect({2, 3}, {0, 1});
  CouplingSpec s;
  s.J.resize(g.lattice_edge_count());
  for (std::size_t e = 0; e < s.J.size(); ++e) s.J[e] = 0.15 + 0.1 * e;
  double lib = fk_event_probability(g, s, [](const BondConfig&, UnionFind& uf) { return uf.same(0, 5); });
  double ref = oracle::fk(g, s, [](const std::vector<int>& l) { return l[0] == l[5]; });
  EXPECT_NEAR(lib, ref, 1e-13);
}

TEST(ExactFk, EdwardsSokalFree) {
  auto g = rect({3, 3}, {1, 1});
  auto s = CouplingSpec::uniform(0.45);
  IsingTable t(g, s);
  for (std::uint32_t y = 0; y < 9; ++y) {
    double p = fk_event_probability(g, s, [y](const BondConfig&, UnionFind& uf) { return uf.same(0, y); });
    EXPECT_NEAR(p, t.two(0, y), 1e-12);
  }
}

TEST(ExactFk, EdwardsSokalPinned) {
  auto g = rect({3, 4}, {1, 1});
  auto s = CouplingSpec::uniform(0.6, 0.0, Boundary::pinned);
  IsingTable t(g, s);
  auto gh = static_cast<std::uint32_t>(g.lattice_vertex_count());
  for (std::uint32_t x = 0; x < g.lattice_vertex_count(); ++x) {
    double p = fk_event_probability(g, s, [x, gh](const BondConfig&, UnionFind& uf) { return uf.same(x, gh); });
    EXPECT_NEAR(p, t.one(x), 1e-12);
    double q = fk_event_probability(g, s, [x](const BondConfig&, UnionFind& uf) { return uf.same(x, 5); });
    EXPECT_NEAR(q, t.two(x, 5), 1e-12);
  }
}

TEST(ExactFk, EdwardsSokalGhostField) {
  auto g = rect({2, 3}, {0, 1}, true);
  CouplingSpec s = CouplingSpec::uniform(0.3, 0.2);
  auto gh = g.ghost();
  for (std::uint32_t x = 0; x < 6; ++x) {
    double p = fk_event_probability(g, s, [x, gh](const BondConfig&, UnionFind& uf) { return uf.same(x, gh); });
    EXPECT_NEAR(p, spin_expectation(g, s, {x}), 1e-12);
    EXPECT_NEAR(p, oracle::ising(g, s, {x}), 1e-12);
  }
}

TEST(ExactFk, FieldWithoutGhostIsRejected) {
  auto g = rect({2}, {0});
  EXPECT_THROW(fk_event_probability(g, CouplingSpec::uniform(0.3, 0.1), [](const BondConfig&, UnionFind&) { return true; }),
               ValidationError);
}

TEST(ExactCurrent, SingleEdgeSeries) {
  auto g = rect({2}, {0});
  auto s = CouplingSpec::uniform(0.7);
  auto z = current_sum(g, s, {}, 60);
  auto n = current_sum(g, s, {0, 1}, 60);
  EXPECT_NEAR(z.value, std::cosh(0.7), 1e-14);
  EXPECT_NEAR(n.value, std::sinh(0.7), 1e-14);
  EXPECT_LT(z.residual, 1e-15);
  EXPECT_EQ(current_sum(g, s, {0}, 60).value, 0.0);
}

TEST(ExactCurrent, RatioEqualsSpinCorrelation) {
  auto g = rect({3, 3}, {1, 1}, true);
  CouplingSpec s = CouplingSpec::uniform(0.35, 0.1);
  for (std::vector<std::uint32_t> A : {std::vector<std::uint32_t>{0, 8}, {4, g.ghost()}, {1, 2, 3, 4}}) {
    auto r = current_ratio(g, s, A, 30);
    EXPECT_NEAR(r.value, spin_expectation(g, s, A), 1e-11);
    EXPECT_LT(r.residual, 1e-12);
  }
}

TEST(ExactCurrent, ResidualBoundsTruncation) {
  auto g = rect({2, 2}, {0, 0});
  auto s = CouplingSpec::uniform(1.1);
  auto exact = current_sum(g, s, {}, 80);
  for (int N : {1, 2, 3, 5}) {
    auto t = current_sum(g, s, {}, N);
    EXPECT_LE(exact.value - t.value, t.residual * (1 + 1e-12));
    EXPECT_GE(exact.value - t.value, 0.0);
  }
}

TEST(ExactCurrent, EnumerationMatchesSum) {
  auto g = rect({2, 2}, {0, 0});
  auto s = CouplingSpec::uniform(0.5);
  auto w = current_weights(g, s);
  auto list = enumerate_currents(g, w, {0, 3}, 6);
  double acc = 0;
  for (const auto& c : list) acc += c.weight;
  EXPECT_NEAR(acc, current_sum(g, s, {0, 3}, 6).value, 1e-13);
}

TEST(ExactCurrent, SwitchingIdentityOnSquare) {
  auto H = rect({2, 2}, {0, 0});
  auto s = CouplingSpec::uniform(0.4);
  std::vector<std::uint8_t> mask(H.edge_count(), 1);
  mask[0] = 0;
  auto F = [](std::span<const int> n) { return 1.0 + 0.1 * n[1]; };
  auto r = verify_switching(H, mask, s, {1, 3}, {0, 2}, F, 1.0 + 0.1 * 4, 4);
  EXPECT_TRUE(r.within()) << r.lhs << " " << r.rhs << " " << r.residual;
  EXPECT_GT(r.lhs, 0.0);
}

TEST(ExactCurrent, SwitchingNeedsSourcesInsideG) {
  auto H = rect({3}, {1});
  std::vector<std::uint8_t> mask{1, 0};
  EXPECT_THROW(verify_switching(H, mask, CouplingSpec::uniform(0.3), {2}, {0}, [](std::span<const int>) { return 1.0; },
                                1.0, 2),
               HypothesisError);
}

TEST(ClusterLaw, SumsToOneAndMatchesConnectivity) {
  auto g = rect({2, 3}, {0, 1});
  double p = 0.4;
  auto law = cluster_law(g, p, 0);
  EXPECT_NEAR(law.total(), 1.0, 1e-13);
  double beta = -0.5 * std::log1p(-p);
  double conn = law.probability([&](std::uint64_t c) {
    auto vs = cluster_vertices(g, c, 0);
    return std::binary_search(vs.begin(), vs.end(), 5u);
  });
  EXPECT_NEAR(conn, spin_expectation(g, CouplingSpec::uniform(beta), {0, 5}), 1e-12);
}

TEST(ClusterLaw, PinskerBound) {
  auto g = rect({2, 2}, {0, 0});
  auto a = cluster_law(g, 0.3, 0), b = cluster_law(g, 0.35, 0);
  double H = relative_entropy(b, a);
  EXPECT_GE(H, 0.0);
  auto ev = [&](std::uint64_t c) { return cluster_vertices(g, c, 0).size() >= 3; };
  double pa = a.probability(ev), pb = b.probability(ev);
  EXPECT_LE(std::abs(pa - pb), pinsker_bound(pa, pb, H));
}

TEST(ClusterLaw, EntropyStationaryAtEqualParameters) {
  auto g = rect({2, 2}, {0, 0});
  double p = 0.3, dp = 1e-4;
  auto base = cluster_law(g, p, 0);
  double Hp = relative_entropy(base, cluster_law(g, p + dp, 0));
  double Hm = relative_entropy(base, cluster_law(g, p - dp, 0));
  EXPECT_NEAR((Hp - Hm) / (2 * dp), 0.0, 1e-6);
  EXPECT_NEAR(relative_entropy(base, base), 0.0, 1e-15);
}
