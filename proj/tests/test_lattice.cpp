#include <gtest/gtest.h>

#include "critical_arm/lattice.hpp"

using namespace critical_arm;

TEST(Lattice, BoxCountsWithoutGhost) {
  auto g = build_box(2, 1, false);
  EXPECT_EQ(g.lattice_vertex_count(), 9u);
  EXPECT_EQ(g.edge_count(), 12u);
  EXPECT_EQ(g.boundary().size(), 8u);
}

TEST(Lattice, BoxCountsWithGhost) {
  auto g = build_box(2, 1, true);
  EXPECT_EQ(g.vertex_count(), 10u);
  EXPECT_EQ(g.edge_count(), 21u);
  EXPECT_TRUE(g.is_ghost_edge(12));
  EXPECT_EQ(g.edge_direction(g.ghost_edge(0)), 2);
}

TEST(Lattice, CountsMatchFormula) {
  for (int d = 1; d <= 4; ++d)
    for (int n = 0; n <= 3; ++n) {
      auto g = build_box(d, n, false);
      std::size_t side = 2 * n + 1, nv = 1;
      for (int i = 0; i < d; ++i) nv *= side;
      EXPECT_EQ(g.lattice_vertex_count(), nv);
      EXPECT_EQ(g.edge_count(), d * (side - 1) * nv / side);
    }
}

TEST(Lattice, OriginAndCoords) {
  auto g = build_box(3, 2, false);
  auto o = g.origin();
  EXPECT_EQ(g.coords(o), (std::vector<int>{0, 0, 0}));
  for (std::uint32_t v = 0; v < g.lattice_vertex_count(); ++v) EXPECT_EQ(g.index_of(g.coords(v)), v);
  EXPECT_EQ(g.index_of(std::vector<int>{3, 0, 0}), LatticeGraph::npos);
}

TEST(Lattice, EdgesAreUnitSteps) {
  auto g = build_box(3, 2, true);
  for (std::size_t e = 0; e < g.lattice_edge_count(); ++e) {
    auto a = g.coords(g.edges()[e].u), b = g.coords(g.edges()[e].v);
    int dist = 0;
    for (int i = 0; i < 3; ++i) dist += std::abs(a[i] - b[i]);
    EXPECT_EQ(dist, 1);
    EXPECT_EQ(g.edge_between(g.edges()[e].u, g.edges()[e].v), e);
  }
}

TEST(Lattice, SphereSizes) {
  auto g = build_box(2, 3, false);
  EXPECT_EQ(g.sphere(0).size(), 1u);
  for (int m = 1; m <= 3; ++m) EXPECT_EQ(g.sphere(m).size(), static_cast<std::size_t>(8 * m));
}

TEST(Lattice, EdgeBoundaryOfSingleSiteAndBox) {
  auto g = build_box(2, 2, false);
  EXPECT_EQ(edge_boundary(SubsetRegion(g, {g.origin()}, g.origin())).size(), 4u);
  EXPECT_EQ(edge_boundary(box_region(g, 1)).size(), 12u);
  auto whole = edge_boundary(box_region(g, 2));
  EXPECT_EQ(whole.size(), 20u);
  for (const auto& p : whole) EXPECT_TRUE(p.exterior);
}

TEST(Lattice, TorusIsRegular) {
  auto g = LatticeGraph::torus(3, 4, false);
  EXPECT_EQ(g.lattice_vertex_count(), 64u);
  EXPECT_EQ(g.edge_count(), 192u);
  for (std::uint32_t v = 0; v < 64; ++v) EXPECT_EQ(g.degree(v), 6u);
  EXPECT_TRUE(g.boundary().empty());
}

TEST(Lattice, SerializeRoundTrip) {
  auto g = build_box(2, 2, true);
  auto h = LatticeGraph::deserialize(g.serialize());
  EXPECT_EQ(h.edges(), g.edges());
  EXPECT_EQ(h.vertex_count(), g.vertex_count());
  std::vector<std::uint32_t> vs{0, 1, 5, 6};
  auto sub = induced_subgraph(g, vs, false);
  auto sub2 = LatticeGraph::deserialize(sub.serialize());
  EXPECT_EQ(sub2.edges(), sub.edges());
  EXPECT_EQ(sub2.lattice_vertex_count(), 4u);
}

TEST(Lattice, EmbeddedRejectsNonUnitEdges) {
  EXPECT_THROW(LatticeGraph::embedded(1, {0, 2}, {{0, 1}}, false), ValidationError);
}

TEST(Lattice, BudgetIsEnforced) {
  EXPECT_THROW(build_box(3, 50, false, 1000), CapacityError);
}
