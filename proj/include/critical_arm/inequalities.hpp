#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bonds.hpp"
#include "coupling.hpp"
#include "errors.hpp"
#include "exact_fk.hpp"
#include "exact_spin.hpp"
#include "lattice.hpp"
#include "rng.hpp"

namespace critical_arm {

inline const std::vector<std::string>& inequality_names() {
  static const std::vector<std::string> names = {
      "griffiths",   "monotonicity", "ding",       "ghs",        "double_truncated", "neighbor_comparison",
      "simon_lieb",  "boundary_field", "bk_type",  "tree_graph", "four_point",       "es_identities",
      "edge_influence"};
  return names;
}

struct InequalityReport {
  std::string name;
  std::uint64_t instance_seed = 0;
  std::string instance;
  double left = 0;
  double right = 0;
  double margin = 0;
  bool pass = false;
};

struct InequalityInstance {
  std::string name;
  std::uint64_t seed = 0;
  int variant = 0;
  std::string description;
  LatticeGraph g = LatticeGraph::abstract(1, {}, false);
  CouplingSpec s;
  std::optional<LatticeGraph> g2;
  CouplingSpec s2;
  std::vector<std::uint32_t> A, B, S;
};

namespace ineq {

inline constexpr double default_tolerance = 1e-10;
inline constexpr double es_tolerance = 1e-12;

inline double uni(Rng& r, double a, double b) { return a + (b - a) * r.uniform(); }
template <class T>
const T& pick(Rng& r, const std::vector<T>& v) {
  return v[r.below(v.size())];
}
inline std::uint32_t pick_vertex(Rng& r, const LatticeGraph& g) {
  return static_cast<std::uint32_t>(r.below(g.lattice_vertex_count()));
}
inline std::vector<double> random_J(Rng& r, const LatticeGraph& g) {
  std::vector<double> J(std::max<std::size_t>(g.lattice_edge_count(), 1));
  for (auto& j : J) j = uni(r, 0.1, 1.2);
  return J;
}
inline std::vector<double> random_h(Rng& r, const LatticeGraph& g) {
  std::vector<double> h(g.lattice_vertex_count());
  for (auto& x : h) x = uni(r, 0.0, 0.5);
  return h;
}

inline LatticeGraph path_graph(int k, bool ghost = false) { return LatticeGraph::rect({k}, {k / 2}, ghost); }

inline LatticeGraph cycle_graph(int k, bool ghost = false) {
  if (k == 4) return LatticeGraph::rect({2, 2}, {0, 0}, ghost);
  if (k == 6) {
    auto b = LatticeGraph::rect({2, 3}, {0, 1}, false);
    std::vector<std::uint32_t> keep, all;
    for (std::uint32_t e = 0; e < b.lattice_edge_count(); ++e) {
      auto cu = b.coords(b.edges()[e].u), cv = b.coords(b.edges()[e].v);
      if (cu[1] == 0 && cv[1] == 0) continue;  // middle rung
      keep.push_back(e);
    }
    for (std::uint32_t v = 0; v < b.lattice_vertex_count(); ++v) all.push_back(v);
    return induced_subgraph(b, all, ghost, &keep);
  }
  if (k == 8) {
    auto b = LatticeGraph::rect({3, 3}, {1, 1}, false);
    std::vector<std::uint32_t> vs;
    for (std::uint32_t v = 0; v < b.lattice_vertex_count(); ++v)
      if (v != b.origin()) vs.push_back(v);
    return induced_subgraph(b, vs, ghost);
  }
  throw ValidationError("cycle_graph: supported lengths are 4, 6, 8");
}

inline LatticeGraph triangle_graph(bool ghost = false) { return LatticeGraph::abstract(3, {{0, 1}, {1, 2}, {0, 2}}, ghost); }

// Embedded family: paths, cycles, 2x2, 2x3, 3x3 boxes.
inline LatticeGraph family_graph(Rng& r, std::string& desc, bool ghost = false, bool allow_triangle = false) {
  int kinds = allow_triangle ? 6 : 5;
  int k = static_cast<int>(r.below(kinds));
  switch (k) {
    case 0: {
      int n = 2 + static_cast<int>(r.below(5));
      desc = "path" + std::to_string(n);
      return path_graph(n, ghost);
    }
    case 1: {
      int c = std::vector<int>{4, 6, 8}[r.below(3)];
      desc = "cycle" + std::to_string(c);
      return cycle_graph(c, ghost);
    }
    case 2: desc = "box2x2"; return LatticeGraph::rect({2, 2}, {0, 0}, ghost);
    case 3: desc = "box2x3"; return LatticeGraph::rect({2, 3}, {0, 1}, ghost);
    case 4: desc = "box3x3"; return LatticeGraph::rect({3, 3}, {1, 1}, ghost);
    default: desc = "triangle"; return triangle_graph(ghost);
  }
}

inline std::vector<std::uint32_t> random_subset(Rng& r, const LatticeGraph& g, std::size_t maxsize) {
  std::vector<std::uint32_t> out;
  std::size_t k = 1 + r.below(maxsize);
  for (std::size_t i = 0; i < k; ++i) out.push_back(pick_vertex(r, g));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Random connected vertex set grown from root inside `allowed`.
inline std::vector<std::uint32_t> grow_region(Rng& r, const LatticeGraph& g, std::uint32_t root, std::size_t size,
                                              const std::vector<std::uint8_t>& allowed) {
  std::vector<std::uint32_t> S{root};
  std::vector<std::uint8_t> in(g.lattice_vertex_count(), 0);
  in[root] = 1;
  while (S.size() < size) {
    std::vector<std::uint32_t> frontier;
    for (auto u : S)
      for (auto e : g.incident(u)) {
        if (g.is_ghost_edge(e)) continue;
        auto v = g.other(e, u);
        if (!in[v] && allowed[v]) frontier.push_back(v);
      }
    if (frontier.empty()) break;
    auto v = pick(r, frontier);
    in[v] = 1;
    S.push_back(v);
  }
  std::sort(S.begin(), S.end());
  return S;
}

// φ⁰ pair-connection table over lattice vertices (plus ghost node last).
inline std::vector<std::vector<double>> fk_pair_table(const LatticeGraph& g, const CouplingSpec& s) {
  const std::size_t n = g.lattice_vertex_count() + 1;
  std::vector<std::vector<double>> P(n, std::vector<double>(n, 0.0));
  FkEnumerator en(g, s);
  double Z = 0.0;
  std::vector<std::uint32_t> root(n);
  en.for_each([&](const BondConfig&, UnionFind& uf, double w) {
    Z += w;
    for (std::uint32_t a = 0; a < n; ++a) root[a] = uf.find(a);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (root[a] == root[b]) P[a][b] += w;
  });
  for (auto& row : P)
    for (auto& x : row) x /= Z;
  return P;
}

inline CouplingSpec with_J(const CouplingSpec& s, std::vector<double> J) {
  auto t = s;
  t.J = std::move(J);
  return t;
}

inline std::string set_str(const std::vector<std::uint32_t>& v) {
  std::string s = "{";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + "}";
}

inline void require(bool cond, const std::string& what) {
  if (!cond) throw HypothesisError(what);
}

inline bool uniform_J(const CouplingSpec& s, double& beta) {
  beta = s.J.at(0);
  for (double j : s.J)
    if (j != beta) return false;
  return true;
}

inline InequalityReport make(const InequalityInstance& in, double left, double right, double margin,
                             double tol = default_tolerance) {
  InequalityReport r;
  r.name = in.name;
  r.instance_seed = in.seed;
  r.instance = in.description;
  r.left = left;
  r.right = right;
  r.margin = margin;
  r.pass = margin >= -tol;
  return r;
}

inline std::vector<std::uint32_t> all_vertices(const LatticeGraph& g) {
  std::vector<std::uint32_t> v(g.lattice_vertex_count());
  for (std::uint32_t i = 0; i < v.size(); ++i) v[i] = i;
  return v;
}

// Map a vertex of `from` to `to` through coordinates.
inline std::uint32_t map_vertex(const LatticeGraph& from, const LatticeGraph& to, std::uint32_t v) {
  auto c = from.coords(v);
  auto w = to.index_of(c);
  if (w == LatticeGraph::npos) throw HypothesisError("vertex not contained in the larger graph");
  return w;
}

// Deterministic coupling field on Z^d edges (for nested-graph instances).
struct EdgeField {
  std::uint64_t seed;
  double lo, hi;
  double operator()(std::vector<int> a, std::vector<int> b) const {
    if (b < a) std::swap(a, b);
    std::uint64_t x = seed;
    for (int c : a) x = x * 1000003ULL + static_cast<std::uint64_t>(c + 1000);
    for (int c : b) x = x * 1000003ULL + static_cast<std::uint64_t>(c + 1000);
    std::uint64_t st = x;
    double u = static_cast<double>(splitmix64(st) >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }
};

inline std::vector<double> couplings_from(const LatticeGraph& g, const EdgeField& K) {
  std::vector<double> J(g.lattice_edge_count());
  for (std::size_t e = 0; e < J.size(); ++e) J[e] = K(g.coords(g.edges()[e].u), g.coords(g.edges()[e].v));
  return J;
}

inline CouplingSpec plus_from_field(const LatticeGraph& g, const EdgeField& K, std::vector<double> h) {
  return CouplingSpec::plus_with(g, couplings_from(g, K), std::move(h), [&](std::uint32_t u, int dir, int sign) {
    auto a = g.coords(u);
    auto b = a;
    b[dir] += sign;
    return K(a, b);
  });
}

// φ_β(S) exactly: β Σ_{u∈S, v∉S, u∼v} ⟨σ_root σ_u⟩_{S,β}.
inline double phi_exact(const LatticeGraph& parent, const std::vector<std::uint32_t>& S, std::uint32_t root, double beta) {
  SubsetRegion region(parent, S, root);
  auto pairs = edge_boundary(region);
  auto sub = induced_subgraph(parent, region.members, false);
  auto sroot = map_vertex(parent, sub, root);
  IsingTable t(sub, CouplingSpec::uniform(beta));
  double acc = 0.0;
  for (const auto& p : pairs) acc += t.two(sroot, map_vertex(parent, sub, p.u));
  return beta * acc;
}

}  // namespace ineq

// ---------------------------------------------------------------------------
// Instance generators

inline InequalityInstance random_instance(const std::string& name, std::uint64_t seed) {
  using namespace ineq;
  Rng r(seed);
  InequalityInstance in;
  in.name = name;
  in.seed = seed;
  std::string gd;

  if (name == "griffiths") {
    in.g = family_graph(r, gd, false, true);
    in.s.J = random_J(r, in.g);
    in.s.h = random_h(r, in.g);
    in.A = random_subset(r, in.g, 3);
    in.B = random_subset(r, in.g, 3);
  } else if (name == "monotonicity") {
    in.variant = static_cast<int>(r.below(2));
    if (in.variant == 0) {
      in.g = family_graph(r, gd, false, true);
      auto J = random_J(r, in.g);
      auto h = random_h(r, in.g);
      auto J2 = J, h2 = h;
      for (std::size_t e = 0; e < J.size(); ++e) {
        if (r.below(3) == 0) J[e] = 0.0;  // edge absent from G
        J2[e] += uni(r, 0.0, 0.3);
      }
      for (std::size_t x = 0; x < h.size(); ++x) {
        if (r.below(3) == 0) h[x] *= uni(r, 0.0, 1.0);
        h2[x] += uni(r, 0.0, 0.2);
      }
      in.s.J = J;
      in.s.h = h;
      in.s2.J = J2;
      in.s2.h = h2;
      in.A = random_subset(r, in.g, 3);
    } else {
      EdgeField K{r.next(), 0.1, 1.2};
      std::vector<std::pair<std::vector<int>, std::vector<int>>> shapes = {
          {{2, 2}, {0, 0}}, {{2, 3}, {0, 1}}, {{3, 3}, {1, 1}}, {{1, 3}, {0, 1}}};
      auto [gs, go] = pick(r, shapes);
      in.g = LatticeGraph::rect(gs, go, false);
      std::vector<int> hs = gs, ho = go;
      int grow = 1 + static_cast<int>(r.below(2));
      for (int k = 0; k < grow; ++k) {
        int dir = static_cast<int>(r.below(2));
        if (r.coin()) ++ho[dir];
        ++hs[dir];
      }
      in.g2 = LatticeGraph::rect(hs, ho, false);
      if (in.g2->lattice_vertex_count() > 16) in.g2 = LatticeGraph::rect(gs, go, false);
      in.s = plus_from_field(in.g, K, {0.0});
      in.s2 = plus_from_field(*in.g2, K, {0.0});
      in.A = {pick_vertex(r, in.g)};
      gd = "nested boxes";
    }
  } else if (name == "ding") {
    in.g = family_graph(r, gd, false, true);
    in.s = CouplingSpec::uniform(uni(r, 0.1, 1.2));
    in.s.h = random_h(r, in.g);
    in.A = {pick_vertex(r, in.g), pick_vertex(r, in.g)};
  } else if (name == "ghs") {
    in.g = family_graph(r, gd, false, true);
    in.s.J = random_J(r, in.g);
    in.s.h = random_h(r, in.g);
    in.A = {pick_vertex(r, in.g), pick_vertex(r, in.g), pick_vertex(r, in.g)};
  } else if (name == "double_truncated") {
    in.g = family_graph(r, gd);
    in.s.J = random_J(r, in.g);
    in.A = {pick_vertex(r, in.g), pick_vertex(r, in.g)};
    auto e1 = r.below(in.g.lattice_edge_count()), e2 = r.below(in.g.lattice_edge_count());
    const auto& a = in.g.edges()[e1];
    const auto& b = in.g.edges()[e2];
    in.B = r.coin() ? std::vector<std::uint32_t>{a.u, a.v} : std::vector<std::uint32_t>{a.v, a.u};
    if (r.coin()) in.B.insert(in.B.end(), {b.u, b.v});
    else in.B.insert(in.B.end(), {b.v, b.u});
  } else if (name == "neighbor_comparison") {
    in.variant = static_cast<int>(r.below(2));
    in.g = family_graph(r, gd);
    in.s = CouplingSpec::uniform(uni(r, 0.1, 1.2));
    if (in.variant == 1) in.s.h = random_h(r, in.g);
    const auto& e = in.g.edges()[r.below(in.g.lattice_edge_count())];
    in.B = r.coin() ? std::vector<std::uint32_t>{e.u, e.v} : std::vector<std::uint32_t>{e.v, e.u};
    in.A = {pick_vertex(r, in.g)};
  } else if (name == "simon_lieb") {
    in.g = family_graph(r, gd);
    in.s = CouplingSpec::uniform(uni(r, 0.1, 1.2));
    auto x = pick_vertex(r, in.g);
    std::vector<std::uint8_t> allowed(in.g.lattice_vertex_count(), 1);
    std::size_t size = 1 + r.below(in.g.lattice_vertex_count());
    in.S = grow_region(r, in.g, x, size, allowed);
    in.A = {x, pick_vertex(r, in.g)};
  } else if (name == "boundary_field") {
    double beta = uni(r, 0.1, 1.2);
    double h = r.coin() ? 0.0 : uni(r, 0.0, 0.5);
    EdgeField K{r.next(), 0.1, 1.2};
    if (r.below(2) == 0) {
      int n = 1 + static_cast<int>(r.below(4));
      int a = static_cast<int>(r.below(2)), b = static_cast<int>(r.below(2));
      in.g = LatticeGraph::rect({4 * n + 1 + a + b}, {2 * n + a}, false);
      std::vector<std::uint8_t> allowed(in.g.lattice_vertex_count(), 0);
      for (std::uint32_t v = 0; v < allowed.size(); ++v) allowed[v] = std::abs(in.g.coords(v)[0]) <= n;
      in.S = grow_region(r, in.g, in.g.origin(), 1 + r.below(2 * n + 1), allowed);
      gd = "interval n=" + std::to_string(n);
      auto J = couplings_from(in.g, K);
      for (std::size_t e = 0; e < J.size(); ++e) {
        auto cu = in.g.coords(in.g.edges()[e].u)[0], cv = in.g.coords(in.g.edges()[e].v)[0];
        if (std::abs(cu) <= n || std::abs(cv) <= n) J[e] = beta;
      }
      in.s = CouplingSpec::plus_with(in.g, J, {h}, [&](std::uint32_t u, int dir, int sign) {
        auto c = in.g.coords(u);
        auto d2 = c;
        d2[dir] += sign;
        return K(c, d2);
      });
    } else {
      std::vector<std::pair<std::vector<int>, std::vector<int>>> shapes = {
          {{3, 3}, {1, 1}}, {{3, 4}, {1, 1}}, {{4, 4}, {1, 2}}, {{3, 5}, {1, 2}}, {{4, 4}, {1, 1}}};
      auto [gs, go] = pick(r, shapes);
      in.g = LatticeGraph::rect(gs, go, false);
      std::vector<std::uint8_t> allowed(in.g.lattice_vertex_count(), 0);
      for (std::uint32_t v = 0; v < allowed.size(); ++v) allowed[v] = !in.g.is_boundary(v);
      std::size_t interior = std::count(allowed.begin(), allowed.end(), 1);
      in.S = grow_region(r, in.g, in.g.origin(), 1 + r.below(interior), allowed);
      gd = "rect " + std::to_string(gs[0]) + "x" + std::to_string(gs[1]);
      auto J = couplings_from(in.g, K);
      SubsetRegion region(in.g, in.S, in.g.origin());
      for (std::size_t e = 0; e < J.size(); ++e)
        if (region.contains(in.g.edges()[e].u) || region.contains(in.g.edges()[e].v)) J[e] = beta;
      in.s = CouplingSpec::plus_with(in.g, J, {h}, [&](std::uint32_t u, int dir, int sign) {
        auto c = in.g.coords(u);
        auto d2 = c;
        d2[dir] += sign;
        return K(c, d2);
      });
    }
    in.s2 = CouplingSpec::uniform(beta);
  } else if (name == "bk_type") {
    in.g = family_graph(r, gd);
    in.s = CouplingSpec::uniform(uni(r, 0.1, 1.2));
    auto root = pick_vertex(r, in.g);
    std::vector<std::uint8_t> allowed(in.g.lattice_vertex_count(), 1);
    std::size_t n = in.g.lattice_vertex_count();
    in.S = grow_region(r, in.g, root, 1 + r.below(n - 1), allowed);
    if (in.S.size() == n) in.S.pop_back();
    if (!std::binary_search(in.S.begin(), in.S.end(), root)) {
      in.S = {root};
    }
    std::vector<std::uint32_t> rest;
    for (std::uint32_t v = 0; v < n; ++v)
      if (!std::binary_search(in.S.begin(), in.S.end(), v)) rest.push_back(v);
    std::size_t k = 1 + r.below(std::min<std::size_t>(3, rest.size()));
    for (std::size_t i = 0; i < k; ++i) in.B.push_back(pick(r, rest));
    std::sort(in.B.begin(), in.B.end());
    in.B.erase(std::unique(in.B.begin(), in.B.end()), in.B.end());
    in.A = {root};
  } else if (name == "tree_graph") {
    in.g = family_graph(r, gd);
    in.s = CouplingSpec::uniform(uni(r, 0.1, 1.2));
    auto x = pick_vertex(r, in.g);
    std::uint32_t z;
    do z = pick_vertex(r, in.g);
    while (z == x);
    in.A = {x, pick_vertex(r, in.g), z};
  } else if (name == "four_point") {
    in.g = family_graph(r, gd);
    in.s = CouplingSpec::uniform(uni(r, 0.1, 1.2));
    for (int i = 0; i < 4; ++i) in.A.push_back(pick_vertex(r, in.g));
  } else if (name == "es_identities") {
    in.variant = static_cast<int>(r.below(4));
    if (in.variant == 1 || in.variant == 2) {
      std::vector<LatticeGraph> gs = {path_graph(3), path_graph(4), path_graph(5), path_graph(6),
                                      LatticeGraph::rect({3, 3}, {1, 1}, false),
                                      LatticeGraph::rect({3, 4}, {1, 1}, false)};
      in.g = pick(r, gs);
      gd = "wired graph";
      in.s.J = random_J(r, in.g);
      in.s.bc = Boundary::pinned;
    } else {
      in.g = family_graph(r, gd, in.variant == 3);
      in.s.J = random_J(r, in.g);
      if (in.variant == 3) in.s.h = random_h(r, in.g);
    }
    in.A = {pick_vertex(r, in.g), pick_vertex(r, in.g)};
  } else if (name == "edge_influence") {
    in.variant = static_cast<int>(r.below(2));
    double beta = uni(r, 0.1, 1.2);
    if (in.variant == 0) {
      int n = 1 + static_cast<int>(r.below(4));
      in.g = LatticeGraph::rect({4 * n + 1}, {2 * n}, false);
      in.g2 = LatticeGraph::rect({2 * n + 1}, {n}, false);
      std::vector<std::uint32_t> inner;
      for (std::uint32_t e = 0; e < in.g.lattice_edge_count(); ++e)
        if (std::abs(in.g.coords(in.g.edges()[e].u)[0]) <= n && std::abs(in.g.coords(in.g.edges()[e].v)[0]) <= n)
          inner.push_back(e);
      const auto& e = in.g.edges()[pick(r, inner)];
      in.B = {e.u, e.v};
      gd = "interval n=" + std::to_string(n);
    } else {
      std::vector<LatticeGraph> gs = {path_graph(3), path_graph(5), LatticeGraph::rect({3, 3}, {1, 1}, false),
                                      LatticeGraph::rect({2, 3}, {0, 1}, false),
                                      LatticeGraph::rect({3, 4}, {1, 1}, false)};
      in.g = pick(r, gs);
      const auto& e = in.g.edges()[r.below(in.g.lattice_edge_count())];
      in.B = {e.u, e.v};
      gd = "graph";
    }
    in.s = CouplingSpec::uniform(beta);
  } else {
    throw ValidationError("unknown inequality: " + name);
  }
  in.description = gd + " A=" + ineq::set_str(in.A) + " B=" + ineq::set_str(in.B) + " S=" + ineq::set_str(in.S) +
                   " variant=" + std::to_string(in.variant);
  return in;
}

// ---------------------------------------------------------------------------
// Checkers

inline InequalityReport check_inequality(const std::string& name, const InequalityInstance& in) {
  using namespace ineq;
  const auto& g = in.g;
  for (double j : in.s.J) require(j >= 0.0, "couplings must be nonnegative");
  for (double h : in.s.h) require(h >= 0.0, "fields must be nonnegative");

  if (name == "griffiths") {
    IsingTable t(g, in.s);
    double tr = t.truncated(in.A, in.B);
    return make(in, 0.0, tr, tr);
  }
  if (name == "monotonicity") {
    if (in.variant == 0) {
      require(in.s.J.size() == in.s2.J.size() && in.s.h.size() == in.s2.h.size(), "monotonicity: shape mismatch");
      for (std::size_t e = 0; e < in.s.J.size(); ++e) require(in.s.J[e] <= in.s2.J[e], "monotonicity: J > J'");
      for (std::size_t x = 0; x < in.s.h.size(); ++x) require(in.s.h[x] <= in.s2.h[x], "monotonicity: h > h'");
      double a = IsingTable(g, in.s).expect(in.A);
      double b = IsingTable(g, in.s2).expect(in.A);
      return make(in, a, b, b - a);
    }
    require(in.g2.has_value(), "monotonicity: missing larger graph");
    const auto& H = *in.g2;
    for (std::size_t e = 0; e < g.lattice_edge_count(); ++e) {
      auto u = map_vertex(g, H, g.edges()[e].u), v = map_vertex(g, H, g.edges()[e].v);
      auto eh = H.edge_between(u, v);
      require(eh != LatticeGraph::npos, "monotonicity: G is not a subgraph of H");
      require(in.s.coupling(e) == in.s2.coupling(eh), "monotonicity: J' restricted to E differs from J");
    }
    auto v = in.A.at(0);
    double small = IsingTable(g, in.s).one(v);
    double big = IsingTable(H, in.s2).one(map_vertex(g, H, v));
    return make(in, big, small, small - big);
  }
  if (name == "ding") {
    double beta;
    require(uniform_J(in.s, beta), "ding: coupling must be uniform");
    IsingTable th(g, in.s);
    auto s0 = in.s;
    s0.h = {0.0};
    IsingTable t0(g, s0);
    auto x = in.A.at(0), y = in.A.at(1);
    double lhs = th.truncated({x}, {y});
    double rhs = t0.two(x, y);
    return make(in, lhs, rhs, rhs - lhs);
  }
  if (name == "ghs") {
    IsingTable t(g, in.s);
    auto o = in.A.at(0), x = in.A.at(1), y = in.A.at(2);
    double lhs = t.truncated({o}, {x, y});
    double rhs = t.truncated({o}, {x}) * t.one(y) + t.truncated({o}, {y}) * t.one(x);
    return make(in, lhs, rhs, rhs - lhs);
  }
  if (name == "double_truncated") {
    auto x = in.A.at(0), y = in.A.at(1);
    std::uint32_t zz[2] = {in.B.at(0), in.B.at(1)}, uu[2] = {in.B.at(2), in.B.at(3)};
    require(g.edge_between(zz[0], zz[1]) != LatticeGraph::npos, "double_truncated: zw must be an edge");
    require(g.edge_between(uu[0], uu[1]) != LatticeGraph::npos, "double_truncated: uv must be an edge");
    IsingTable tJ(g, in.s);
    auto E = [&](std::vector<std::uint32_t> a) { return tJ.expect(a); };
    std::vector<std::uint32_t> xy{x, y}, zw{zz[0], zz[1]}, uv{uu[0], uu[1]};
    auto cat = [](std::vector<std::uint32_t> a, const std::vector<std::uint32_t>& b) {
      a.insert(a.end(), b.begin(), b.end());
      return a;
    };
    double xyzw_uv = E(cat(cat(xy, zw), uv)) - E(cat(xy, zw)) * E(uv);
    double zw_uv = E(cat(zw, uv)) - E(zw) * E(uv);
    double xy_uv = E(cat(xy, uv)) - E(xy) * E(uv);
    double lhs = xyzw_uv - E(xy) * zw_uv - E(zw) * xy_uv;
    int f[2] = {1, 0};
    auto eight = [&](const IsingTable& t) {
      double acc = 0.0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          acc += 2.0 * t.two(x, zz[i]) * t.two(zz[f[i]], uu[j]) * t.two(uu[f[j]], y);
          acc += 2.0 * t.two(y, zz[i]) * t.two(zz[f[i]], uu[j]) * t.two(uu[f[j]], x);
        }
      return acc;
    };
    double R1 = eight(tJ);
    double beta = in.s.max_coupling();
    double jmin = *std::min_element(in.s.J.begin(), in.s.J.end());
    IsingTable tb(g, CouplingSpec::uniform(beta));
    double R2 = eight(tb);
    double C = 1.0 / std::tanh(jmin / 2.0);
    double R3 = 2.0 * (1 + C * C) * (1 + C * C) *
                (tb.two(x, zz[0]) * tb.two(zz[1], uu[0]) * tb.two(uu[1], y) +
                 tb.two(y, zz[0]) * tb.two(zz[1], uu[0]) * tb.two(uu[1], x));
    double margin = std::min({R1 - lhs, R2 - R1, R3 - R2});
    return make(in, lhs, R3, margin);
  }
  if (name == "neighbor_comparison") {
    double beta;
    require(uniform_J(in.s, beta), "neighbor_comparison: coupling must be uniform");
    auto z = in.B.at(0), w = in.B.at(1);
    require(g.edge_between(z, w) != LatticeGraph::npos, "neighbor_comparison: zw must be an edge");
    IsingTable t(g, in.s);
    double th = std::tanh(beta);
    if (in.variant == 0) {
      auto x = in.A.at(0);
      double lhs = th * t.two(x, z), rhs = t.two(x, w);
      return make(in, lhs, rhs, rhs - lhs);
    }
    double lhs = th * t.one(z), rhs = t.one(w);
    return make(in, lhs, rhs, rhs - lhs);
  }
  if (name == "simon_lieb") {
    double beta;
    require(uniform_J(in.s, beta), "simon_lieb: coupling must be uniform");
    auto x = in.A.at(0), y = in.A.at(1);
    SubsetRegion V(g, in.S, x);
    std::vector<double> JG(g.lattice_edge_count(), 0.0);
    for (std::size_t e = 0; e < JG.size(); ++e)
      if (V.contains(g.edges()[e].u) && V.contains(g.edges()[e].v)) JG[e] = beta;
    IsingTable tH(g, in.s), tG(g, with_J(in.s, JG));
    double rhs = 0.0;
    for (auto u : V.members) {
      bool bd = false;
      for (auto e : g.incident(u))
        if (!g.is_ghost_edge(e) && !V.contains(g.other(e, u))) bd = true;
      if (bd) rhs += tG.two(x, u) * tH.two(u, y);
    }
    double lhs = tH.two(x, y) - (V.contains(y) ? tG.two(x, y) : 0.0);
    return make(in, lhs, rhs, rhs - lhs);
  }
  if (name == "boundary_field") {
    double beta = in.s2.J.at(0);
    auto root = g.origin();
    SubsetRegion S(g, in.S, root);
    for (auto v : S.members) require(!g.is_boundary(v), "boundary_field: S must avoid the boundary of the box");
    for (std::size_t e = 0; e < g.lattice_edge_count(); ++e)
      if (S.contains(g.edges()[e].u) || S.contains(g.edges()[e].v))
        require(in.s.coupling(e) == beta, "boundary_field: J must equal beta on edges touching S");
    require(in.s.h.size() == 1, "boundary_field: field must be uniform");
    require(in.s.bc == Boundary::plus, "boundary_field: plus boundary expected");
    auto sfree = in.s;
    sfree.bc = Boundary::free;
    sfree.ext.clear();
    IsingTable tp(g, in.s), tf(g, sfree);
    double lhs = tp.one(root) - tf.one(root);
    double mx = 0.0;
    for (const auto& p : edge_boundary(S)) {
      require(!p.exterior, "boundary_field: exterior boundary leaves the box");
      mx = std::max(mx, tp.one(p.v));
    }
    double phi = phi_exact(g, S.members, root, beta);
    double rhs = phi * mx;
    return make(in, lhs, rhs, rhs - lhs);
  }
  if (name == "bk_type") {
    double beta;
    require(uniform_J(in.s, beta), "bk_type: coupling must be uniform");
    auto root = in.A.at(0);
    SubsetRegion S(g, in.S, root);
    for (auto b : in.B) require(!S.contains(b), "bk_type: S and B must be disjoint");
    require(!in.B.empty(), "bk_type: B must be nonempty");
    // separation: no path from root to B avoiding ∂S
    std::vector<std::uint8_t> dS(g.lattice_vertex_count(), 0);
    if (g.embedded_in_lattice()) {
      for (const auto& p : edge_boundary(S)) dS[p.u] = 1;
    }
    if (!dS[root]) {
      std::vector<std::uint8_t> seen(g.lattice_vertex_count(), 0);
      std::vector<std::uint32_t> st{root};
      seen[root] = 1;
      while (!st.empty()) {
        auto u = st.back();
        st.pop_back();
        for (auto e : g.incident(u)) {
          if (g.is_ghost_edge(e)) continue;
          auto v = g.other(e, u);
          if (seen[v] || dS[v]) continue;
          seen[v] = 1;
          st.push_back(v);
        }
      }
      for (auto b : in.B) require(!seen[b], "bk_type: boundary of S does not separate root and B");
    }
    auto B = in.B;
    auto conn_B = [&](std::uint32_t v) {
      return [v, B](const BondConfig&, UnionFind& uf) {
        for (auto b : B)
          if (uf.same(v, b)) return true;
        return false;
      };
    };
    std::vector<std::function<bool(const BondConfig&, UnionFind&)>> events;
    events.push_back(conn_B(root));
    auto pairs = edge_boundary(S);
    for (const auto& p : pairs)
      if (!p.exterior) events.push_back(conn_B(p.v));
    auto probs = fk_event_probabilities(g, in.s, events);
    // FK on S: edges of G inside S
    std::vector<std::uint32_t> sedges;
    for (std::uint32_t e = 0; e < g.lattice_edge_count(); ++e)
      if (S.contains(g.edges()[e].u) && S.contains(g.edges()[e].v)) sedges.push_back(e);
    auto sub = induced_subgraph(g, S.members, false, &sedges);
    auto P = fk_pair_table(sub, CouplingSpec::uniform(beta));
    auto sroot = map_vertex(g, sub, root);
    double rhs = 0.0;
    std::size_t k = 1;
    for (const auto& p : pairs) {
      if (p.exterior) continue;
      rhs += P[sroot][map_vertex(g, sub, p.u)] * beta * probs[k++];
    }
    return make(in, probs[0], rhs, rhs - probs[0]);
  }
  if (name == "tree_graph") {
    auto x = in.A.at(0), y = in.A.at(1), z = in.A.at(2);
    require(x != z, "tree_graph: x and z must differ");
    auto P = fk_pair_table(g, in.s);
    double lhs = fk_event_probability(g, in.s, [&](const BondConfig&, UnionFind& uf) { return uf.same(x, y) && uf.same(x, z); });
    double rhs = 0.0;
    std::vector<int> c(g.dim());
    for (std::uint32_t u = 0; u < g.lattice_vertex_count(); ++u) {
      g.coords(u, c.data());
      for (int i = 0; i < g.dim(); ++i)
        for (int sg : {-1, 1}) {
          c[i] += sg;
          auto up = g.index_of(c.data());
          c[i] -= sg;
          if (up == LatticeGraph::npos) continue;
          rhs += P[x][up] * P[up][z] * P[u][y];
        }
    }
    return make(in, lhs, rhs, rhs - lhs);
  }
  if (name == "four_point") {
    auto x = in.A.at(0), y = in.A.at(1), z = in.A.at(2), t = in.A.at(3);
    double lhs = fk_event_probability(
        g, in.s, [&](const BondConfig&, UnionFind& uf) { return uf.same(x, y) && uf.same(x, z) && uf.same(x, t); });
    IsingTable T(g, in.s);
    double rhs = T.two(x, y) * T.two(z, t) + T.two(x, z) * T.two(y, t) + T.two(x, t) * T.two(y, z);
    return make(in, lhs, rhs, rhs - lhs);
  }
  if (name == "es_identities") {
    auto x = in.A.at(0), y = in.A.at(1);
    double lhs = 0, rhs = 0;
    if (in.variant == 0 || in.variant == 1) {
      lhs = fk_event_probability(g, in.s, [&](const BondConfig&, UnionFind& uf) { return uf.same(x, y); });
      rhs = spin_expectation(g, in.s, {x, y});
      if (x == y) rhs = 1.0;
    } else {
      auto gh = static_cast<std::uint32_t>(g.lattice_vertex_count());
      lhs = fk_event_probability(g, in.s, [&](const BondConfig&, UnionFind& uf) { return uf.same(x, gh); });
      rhs = spin_expectation(g, in.s, {x});
    }
    double m = -std::abs(lhs - rhs);
    return make(in, lhs, rhs, m, es_tolerance);
  }
  if (name == "edge_influence") {
    double beta;
    require(uniform_J(in.s, beta), "edge_influence: coupling must be uniform");
    auto x = in.B.at(0), y = in.B.at(1);
    auto e = g.edge_between(x, y);
    require(e != LatticeGraph::npos, "edge_influence: B must be an edge");
    auto wired = in.s;
    wired.bc = Boundary::pinned;
    auto open_e = [e](const BondConfig& b, UnionFind&) { return b[e]; };
    double p1 = fk_event_probability(g, wired, open_e);
    double p0 = fk_event_probability(g, in.s, open_e);
    double lhs = p1 - p0, rhs;
    if (in.variant == 0) {
      require(in.g2.has_value(), "edge_influence: missing inner box");
      const auto& inner = *in.g2;
      int n = inner.sides()[0] / 2;
      require(g.sides()[0] == 4 * n + 1, "edge_influence: outer box must be Λ_2n");
      require(std::abs(g.coords(x)[0]) <= n && std::abs(g.coords(y)[0]) <= n, "edge_influence: e must lie in Λ_n");
      auto m = spin_expectation(inner, CouplingSpec::uniform(beta, 0.0, Boundary::pinned), {inner.origin()});
      rhs = m * m;
    } else {
      IsingTable t(g, wired);
      rhs = t.one(x) * t.one(y);
    }
    return make(in, lhs, rhs, rhs - lhs);
  }
  throw ValidationError("unknown inequality: " + name);
}

inline std::uint64_t instance_seed(std::uint64_t master, std::size_t name_index, std::size_t i) {
  std::uint64_t x = master ^ (0x9e3779b97f4a7c15ULL * (name_index + 1));
  x = splitmix64(x) ^ i;
  return splitmix64(x);
}

inline std::vector<InequalityReport> run_inequality_suite(const std::vector<std::string>& names, std::size_t count,
                                                          std::uint64_t master) {
  std::vector<InequalityReport> out;
  const auto& all = inequality_names();
  for (const auto& n : names) {
    auto it = std::find(all.begin(), all.end(), n);
    if (it == all.end()) throw ValidationError("unknown inequality: " + n);
    std::size_t idx = static_cast<std::size_t>(it - all.begin());
    for (std::size_t i = 0; i < count; ++i) {
      auto inst = random_instance(n, instance_seed(master, idx, i));
      out.push_back(check_inequality(n, inst));
    }
  }
  return out;
}

inline void write_inequality_csv(std::ostream& os, const std::vector<InequalityReport>& rows, bool header = true) {
  if (header) os << "name,instance_seed,lhs,rhs,margin,pass\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%llu,%.17g,%.17g,%.17g,%d\n", r.name.c_str(),
                  static_cast<unsigned long long>(r.instance_seed), r.left, r.right, r.margin, r.pass ? 1 : 0);
    os << buf;
  }
}

}  // namespace critical_arm
