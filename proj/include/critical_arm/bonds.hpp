#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "lattice.hpp"
#include "union_find.hpp"

namespace critical_arm {

// One bit per graph edge (ghost edges included when the graph has a ghost).
struct BondConfig {
  std::vector<std::uint8_t> open;

  BondConfig() = default;
  explicit BondConfig(std::size_t n, bool value = false) : open(n, value ? 1 : 0) {}

  std::size_t size() const { return open.size(); }
  bool operator[](std::size_t e) const { return open[e] != 0; }
  void set(std::size_t e, bool v) { open[e] = v ? 1 : 0; }
  std::size_t count() const { return static_cast<std::size_t>(std::count(open.begin(), open.end(), 1)); }
  friend bool operator==(const BondConfig&, const BondConfig&) = default;
};

// Connectivity of open edges. Node lattice_vertex_count() stands for the ghost; with
// `include_ghost` false ghost edges are ignored.
inline UnionFind bond_clusters(const LatticeGraph& g, const BondConfig& b, bool include_ghost) {
  UnionFind uf(g.lattice_vertex_count() + 1);
  const auto& edges = g.edges();
  std::size_t lim = include_ghost ? b.size() : std::min(b.size(), g.lattice_edge_count());
  for (std::size_t e = 0; e < lim; ++e)
    if (b.open[e]) uf.unite(edges[e].u, edges[e].v);
  return uf;
}

// True iff the origin's lattice-edge cluster meets ∂Λ_m.
inline bool one_arm(const LatticeGraph& g, const BondConfig& b, int m) {
  if (m == 0) return true;
  auto uf = bond_clusters(g, b, false);
  auto o = uf.find(g.origin());
  for (auto v : g.sphere(m))
    if (uf.find(v) == o) return true;
  return false;
}

}  // namespace critical_arm
