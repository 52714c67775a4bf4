#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "bonds.hpp"
#include "errors.hpp"
#include "lattice.hpp"
#include "union_find.hpp"

namespace critical_arm {

// Law of the edge-cluster of the root under the free FK measure at bond parameter p.
// Key 0 is "root isolated".
struct ClusterLaw {
  std::map<std::uint64_t, double> mass;
  std::uint32_t root = 0;

  double total() const {
    double t = 0;
    for (const auto& [k, v] : mass) t += v;
    return t;
  }
  double at(std::uint64_t c) const {
    auto it = mass.find(c);
    return it == mass.end() ? 0.0 : it->second;
  }
  // Probability of a cluster-measurable event.
  template <class Pred>
  double probability(Pred&& pred) const {
    double t = 0;
    for (const auto& [k, v] : mass)
      if (pred(k)) t += v;
    return t;
  }
};

inline ClusterLaw cluster_law(const LatticeGraph& g, double p, std::uint32_t root, std::size_t budget = 24) {
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("cluster_law: p must lie in (0,1)");
  const std::size_t E = g.lattice_edge_count();
  if (E > budget || E > 63) throw BudgetError("cluster_law exceeds edge budget");
  const std::size_t nv = g.lattice_vertex_count();
  ClusterLaw law;
  law.root = root;
  double Z = 0.0;
  UnionFind uf;
  const auto& edges = g.edges();
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << E); ++m) {
    uf.reset(nv);
    int open = 0;
    for (std::size_t e = 0; e < E; ++e)
      if ((m >> e) & 1) {
        uf.unite(edges[e].u, edges[e].v);
        ++open;
      }
    int k = 0;
    for (std::uint32_t v = 0; v < nv; ++v)
      if (uf.find(v) == v) ++k;
    double w = std::pow(p, open) * std::pow(1.0 - p, static_cast<double>(E) - open) * std::ldexp(1.0, k);
    Z += w;
    auto r = uf.find(root);
    std::uint64_t c = 0;
    for (std::size_t e = 0; e < E; ++e)
      if (((m >> e) & 1) && uf.find(edges[e].u) == r) c |= std::uint64_t{1} << e;
    law.mass[c] += w;
  }
  for (auto& [k, v] : law.mass) v /= Z;
  return law;
}

// Σ_C φ'(C) log(φ'(C)/φ(C)).
inline double relative_entropy(const ClusterLaw& pprime, const ClusterLaw& p) {
  double H = 0.0;
  for (const auto& [c, q] : pprime.mass) {
    if (q <= 0.0) continue;
    double r = p.at(c);
    if (r <= 0.0) throw InconsistentLawError("relative_entropy: support of first law exceeds second");
    H += q * std::log(q / r);
  }
  return H;
}

// Pinsker form used for monotone events: |P_p[A] - P_p'[A]| ≤ sqrt(2 max(P_p[A], P_p'[A]) H).
inline double pinsker_bound(double a, double b, double H) { return std::sqrt(2.0 * std::max(a, b) * H); }

// Vertices spanned by an edge-cluster key (root included).
inline std::vector<std::uint32_t> cluster_vertices(const LatticeGraph& g, std::uint64_t c, std::uint32_t root) {
  std::vector<std::uint8_t> in(g.lattice_vertex_count(), 0);
  in[root] = 1;
  for (std::size_t e = 0; e < g.lattice_edge_count() && e < 64; ++e)
    if ((c >> e) & 1) in[g.edges()[e].u] = in[g.edges()[e].v] = 1;
  std::vector<std::uint32_t> out;
  for (std::uint32_t v = 0; v < in.size(); ++v)
    if (in[v]) out.push_back(v);
  return out;
}

}  // namespace critical_arm
