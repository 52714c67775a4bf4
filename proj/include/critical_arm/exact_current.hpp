#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "coupling.hpp"
#include "errors.hpp"
#include "lattice.hpp"
#include "union_find.hpp"

namespace critical_arm {

inline constexpr std::size_t default_current_edge_budget = 28;

// Edge weights for currents: J on lattice edges, total field on ghost edges.
inline std::vector<double> current_weights(const LatticeGraph& g, const CouplingSpec& s) {
  s.validate(g);
  if (s.bc == Boundary::pinned) throw ValidationError("currents: wired boundary is not supported, use a field");
  std::vector<double> w(g.edge_count(), 0.0);
  for (std::size_t e = 0; e < g.lattice_edge_count(); ++e) w[e] = s.coupling(e);
  for (std::uint32_t x = 0; x < g.lattice_vertex_count(); ++x) {
    double f = s.total_field(x);
    if (f < 0.0) throw ValidationError("currents: negative field");
    if (f > 0.0 && !g.has_ghost()) throw ValidationError("currents: a field needs a ghost vertex");
    if (g.has_ghost()) w[g.ghost_edge(x)] = f;
  }
  return w;
}

struct SeriesParts {
  double even = 0, odd = 0, tail = 0;
};

// Σ_{k≤N} w^k/k! split by parity, plus the tail Σ_{k>N} w^k/k!.
inline SeriesParts truncated_series(double w, int N) {
  SeriesParts s;
  double term = 1.0;
  for (int k = 0; k <= N; ++k) {
    (k % 2 == 0 ? s.even : s.odd) += term;
    term *= w / (k + 1);
  }
  for (int k = N + 1; k < N + 400 && term > 0.0; ++k) {
    s.tail += term;
    if (term < 1e-300) break;
    term *= w / (k + 1);
  }
  return s;
}

// Upper bound on Σ over all currents minus Σ over currents with n_e ≤ N, no source constraint.
inline double truncation_residual(const std::vector<double>& w, int N) {
  double R = 0.0, P = 1.0;
  for (double x : w) {
    auto s = truncated_series(x, N);
    double T = s.even + s.odd;
    R = R * (T + s.tail) + P * s.tail;
    P *= T;
  }
  return R;
}

inline std::vector<std::uint8_t> source_parity(const LatticeGraph& g, const std::vector<std::uint32_t>& A) {
  std::vector<std::uint8_t> t(g.vertex_count() + (g.has_ghost() ? 0 : 1), 0);
  for (auto v : A) {
    if (v >= t.size()) throw ValidationError("source set contains an unknown vertex");
    t[v] ^= 1;
  }
  return t;
}

namespace detail {
inline std::vector<std::size_t> last_incident(const LatticeGraph& g) {
  std::vector<std::size_t> last(g.vertex_count(), SIZE_MAX);
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    last[g.edges()[e].u] = e;
    last[g.edges()[e].v] = e;
  }
  return last;
}
}  // namespace detail

struct CurrentSum {
  double value;
  double residual;
};

// Σ_{∂n=A, n_e≤Nmax} w(n), by summing over parity patterns π with ∂π = A.
inline CurrentSum current_sum(const LatticeGraph& g, const CouplingSpec& s, const std::vector<std::uint32_t>& A,
                              int Nmax, std::size_t budget = default_current_edge_budget) {
  if (Nmax < 1) throw ValidationError("current_sum: Nmax must be >= 1");
  auto w = current_weights(g, s);
  std::vector<double> active;
  std::vector<std::uint32_t> ids;
  for (std::size_t e = 0; e < w.size(); ++e)
    if (w[e] > 0.0) ids.push_back(static_cast<std::uint32_t>(e));
  if (ids.size() > budget || Nmax > 200) throw BudgetError("current_sum exceeds enumeration capacity");
  auto target = source_parity(g, A);
  const std::size_t nv = g.vertex_count();
  for (std::size_t v = nv; v < target.size(); ++v)
    if (target[v]) return {0.0, truncation_residual(w, Nmax)};
  std::vector<std::size_t> last(nv, SIZE_MAX);
  for (std::size_t k = 0; k < ids.size(); ++k) {
    last[g.edges()[ids[k]].u] = k;
    last[g.edges()[ids[k]].v] = k;
  }
  for (std::size_t v = 0; v < nv; ++v)
    if (last[v] == SIZE_MAX && target[v]) return {0.0, truncation_residual(w, Nmax)};
  std::vector<double> c0(ids.size()), c1(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) {
    auto sp = truncated_series(w[ids[k]], Nmax);
    c0[k] = sp.even;
    c1[k] = sp.odd;
  }
  std::vector<std::uint8_t> par(nv, 0);
  double total = 0.0;
  auto rec = [&](auto&& self, std::size_t k, double acc) -> void {
    if (k == ids.size()) {
      total += acc;
      return;
    }
    const auto& ed = g.edges()[ids[k]];
    for (int b = 0; b < 2; ++b) {
      par[ed.u] ^= b;
      par[ed.v] ^= b;
      bool ok = (last[ed.u] != k || par[ed.u] == target[ed.u]) && (last[ed.v] != k || par[ed.v] == target[ed.v]);
      if (ok) self(self, k + 1, acc * (b ? c1[k] : c0[k]));
      par[ed.u] ^= b;
      par[ed.v] ^= b;
    }
  };
  rec(rec, 0, 1.0);
  return {total, truncation_residual(w, Nmax)};
}

// ⟨σ_A⟩ as a current ratio, with a bound on the truncation error of the ratio.
inline CurrentSum current_ratio(const LatticeGraph& g, const CouplingSpec& s, const std::vector<std::uint32_t>& A,
                                int Nmax) {
  auto num = current_sum(g, s, A, Nmax);
  auto den = current_sum(g, s, {}, Nmax);
  double r = num.value / den.value;
  return {r, num.residual * std::max(1.0, r) / den.value};
}

struct Current {
  std::vector<std::uint8_t> n;
  double weight;
};

// All currents with sources A, n_e ≤ Nmax, supported on edges with mask[e] != 0 (all if empty).
inline std::vector<Current> enumerate_currents(const LatticeGraph& g, const std::vector<double>& w,
                                               const std::vector<std::uint32_t>& A, int Nmax,
                                               const std::vector<std::uint8_t>& mask = {},
                                               std::size_t max_count = 20'000'000) {
  const std::size_t E = g.edge_count();
  auto target = source_parity(g, A);
  const std::size_t nv = g.vertex_count();
  std::vector<Current> out;
  for (std::size_t v = nv; v < target.size(); ++v)
    if (target[v]) return out;
  auto last = detail::last_incident(g);
  for (std::size_t v = 0; v < nv; ++v)
    if (last[v] == SIZE_MAX && target[v]) return out;
  std::vector<std::vector<double>> tw(E);
  for (std::size_t e = 0; e < E; ++e) {
    bool on = (mask.empty() || mask[e]) && w[e] > 0.0;
    int top = on ? Nmax : 0;
    double t = 1.0;
    for (int k = 0; k <= top; ++k) {
      tw[e].push_back(t);
      t *= w[e] / (k + 1);
    }
  }
  std::vector<std::uint8_t> n(E, 0), par(nv, 0);
  auto rec = [&](auto&& self, std::size_t e, double acc) -> void {
    if (e == E) {
      if (out.size() >= max_count) throw BudgetError("current enumeration exceeds budget");
      out.push_back({n, acc});
      return;
    }
    const auto& ed = g.edges()[e];
    for (std::size_t k = 0; k < tw[e].size(); ++k) {
      std::uint8_t b = k & 1;
      par[ed.u] ^= b;
      par[ed.v] ^= b;
      bool ok = (last[ed.u] != e || par[ed.u] == target[ed.u]) && (last[ed.v] != e || par[ed.v] == target[ed.v]);
      if (ok) {
        n[e] = static_cast<std::uint8_t>(k);
        self(self, e + 1, acc * tw[e][k]);
      }
      par[ed.u] ^= b;
      par[ed.v] ^= b;
    }
    n[e] = 0;
  };
  rec(rec, 0, 1.0);
  return out;
}

// Every cluster of the trace of n restricted to mask meets A an even number of times.
inline bool in_FA(const LatticeGraph& g, std::span<const int> n, const std::vector<std::uint8_t>& mask,
                  const std::vector<std::uint32_t>& A) {
  UnionFind uf(g.vertex_count() + 1);
  for (std::size_t e = 0; e < g.edge_count(); ++e)
    if (n[e] > 0 && (mask.empty() || mask[e])) uf.unite(g.edges()[e].u, g.edges()[e].v);
  std::vector<std::uint8_t> cnt(g.vertex_count() + 1, 0);
  for (auto a : A) cnt[uf.find(a)] ^= 1;
  for (auto c : cnt)
    if (c) return false;
  return true;
}

struct SwitchingResult {
  double lhs;
  double rhs;
  double gap;
  double residual;
  bool within() const { return gap <= residual; }
};

// Switching identity on H with subgraph G given by an edge mask over H's edges:
// Σ_{∂n1=A on G, ∂n2=B on H} F(n1+n2) w(n1)w(n2) vs
// Σ_{∂n1=∅ on G, ∂n2=AΔB on H} F(n1+n2) w(n1)w(n2) 1[(n1+n2)|_G ∈ F_A].
template <class F>
SwitchingResult verify_switching(const LatticeGraph& H, const std::vector<std::uint8_t>& G_mask, const CouplingSpec& s,
                                 const std::vector<std::uint32_t>& A, const std::vector<std::uint32_t>& B, F&& func,
                                 double Fmax, int Nmax, std::size_t pair_budget = 60'000'000) {
  auto w = current_weights(H, s);
  if (G_mask.size() != H.edge_count()) throw ValidationError("switching: mask size mismatch");
  std::vector<std::uint8_t> inG(H.vertex_count(), 0);
  for (std::size_t e = 0; e < H.edge_count(); ++e)
    if (G_mask[e]) inG[H.edges()[e].u] = inG[H.edges()[e].v] = 1;
  for (auto a : A)
    if (a >= inG.size() || !inG[a]) throw HypothesisError("switching: A must lie in V(G)");
  std::vector<std::uint32_t> AB;
  {
    auto t = source_parity(H, A);
    for (auto b : B) t[b] ^= 1;
    for (std::uint32_t v = 0; v < t.size(); ++v)
      if (t[v]) AB.push_back(v);
  }
  auto side = [&](const std::vector<std::uint32_t>& S1, const std::vector<std::uint32_t>& S2, bool indicator) {
    auto L1 = enumerate_currents(H, w, S1, Nmax, G_mask);
    auto L2 = enumerate_currents(H, w, S2, Nmax);
    if (static_cast<double>(L1.size()) * static_cast<double>(L2.size()) > static_cast<double>(pair_budget))
      throw BudgetError("switching: pair enumeration exceeds budget");
    std::vector<int> sum(H.edge_count());
    double acc = 0.0;
    for (const auto& c1 : L1)
      for (const auto& c2 : L2) {
        for (std::size_t e = 0; e < sum.size(); ++e) sum[e] = c1.n[e] + c2.n[e];
        std::span<const int> view(sum);
        if (indicator && !in_FA(H, view, G_mask, A)) continue;
        acc += func(view) * c1.weight * c2.weight;
      }
    return acc;
  };
  double lhs = side(A, B, false);
  double rhs = side({}, AB, true);
  std::vector<double> wG;
  for (std::size_t e = 0; e < w.size(); ++e) wG.push_back(G_mask[e] ? w[e] : 0.0);
  std::vector<double> wboth = wG;
  wboth.insert(wboth.end(), w.begin(), w.end());
  double res = 2.0 * Fmax * truncation_residual(wboth, Nmax);
  return {lhs, rhs, std::abs(lhs - rhs), res};
}

}  // namespace critical_arm
