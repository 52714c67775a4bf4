#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "coupling.hpp"
#include "errors.hpp"
#include "estimate.hpp"
#include "exact_spin.hpp"
#include "lattice.hpp"
#include "swendsen_wang.hpp"
#include "worm.hpp"

namespace critical_arm {

struct DiagramResult {
  std::string quantity;  // phi_S, bubble, triangle, two_point, susceptibility
  double value = 0;
  double se = 0;         // 0 for exact values
  std::string region;
  double beta = 0;
  bool exact = false;
  std::size_t nsamples = 0;
  std::uint32_t root = 0;
};

struct SharpLengthResult {
  double beta = 0;
  int k = 0;             // 0 when no witness up to kmax
  bool exceeded = false;
  std::string witness;   // "box:j"
  DiagramResult phi;
};

inline std::string box_descriptor(int j) { return "box:" + std::to_string(j); }

enum class PhiMode { automatic, exact, monte_carlo };

namespace detail {

inline std::uint32_t local_index(const std::vector<std::uint32_t>& sorted, std::uint32_t v) {
  return static_cast<std::uint32_t>(std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
}

// Roots for the sup over x: every vertex for small boxes, else the origin and a spread of 31.
inline std::vector<std::uint32_t> diagram_roots(const LatticeGraph& g, std::size_t limit) {
  const std::size_t nv = g.lattice_vertex_count();
  std::vector<std::uint32_t> r;
  if (nv <= limit) {
    for (std::uint32_t v = 0; v < nv; ++v) r.push_back(v);
    return r;
  }
  r.push_back(g.origin());
  for (std::size_t i = 1; r.size() < limit && i <= limit; ++i) {
    auto v = static_cast<std::uint32_t>(i * nv / (limit + 1));
    if (std::find(r.begin(), r.end(), v) == r.end()) r.push_back(v);
  }
  return r;
}

}  // namespace detail

// φ_β(S) = β Σ_{(u,v) ∈ ∂S} ⟨σ_root σ_u⟩_{S,β}.
inline DiagramResult phi_S(const SubsetRegion& S, double beta, const std::optional<McOptions>& mc = std::nullopt,
                           PhiMode mode = PhiMode::automatic, std::string descriptor = "") {
  if (!S.parent) throw ValidationError("phi_S: region without parent graph");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ValidationError("phi_S: beta must be finite and >= 0");
  const auto& parent = *S.parent;
  auto pairs = edge_boundary(S);
  auto sub = induced_subgraph(parent, S.members, false);
  auto root = detail::local_index(S.members, S.root);
  DiagramResult r;
  r.quantity = "phi_S";
  r.beta = beta;
  r.root = S.root;
  r.region = descriptor.empty() ? "set:" + std::to_string(S.size()) : descriptor;
  bool enumerable = S.size() <= default_spin_budget;
  if (mode == PhiMode::exact && !enumerable) throw BudgetError("phi_S: region exceeds the exact spin budget");
  if (mode == PhiMode::exact || (mode == PhiMode::automatic && enumerable)) {
    IsingTable t(sub, CouplingSpec::uniform(beta));
    double acc = 0;
    for (const auto& p : pairs) acc += t.two(root, detail::local_index(S.members, p.u));
    r.value = beta * acc;
    r.exact = true;
    return r;
  }
  if (!mc) throw BudgetError("phi_S: region exceeds the exact spin budget and no Monte Carlo parameters were given");
  std::vector<std::uint32_t> us;
  for (const auto& p : pairs) us.push_back(detail::local_index(S.members, p.u));
  auto data = sw_series(sub, CouplingSpec::uniform(beta), *mc, 1, [&] {
    return [&us, root, beta](SamplerState& st, double* out) {
      double acc = 0;
      for (auto u : us) acc += st.clusters.same(root, u) ? 1.0 : 0.0;
      out[0] = beta * acc;
    };
  });
  auto c = combine_chains(observable_slice(data, 0));
  r.value = c.mean;
  r.se = c.se;
  r.nsamples = c.n;
  return r;
}

// Smallest k ≤ kmax with φ_β(Λ_j) < 1/10 for some j ≤ k (boxes only: an upper bound on L(β)).
inline SharpLengthResult sharp_length(int d, double beta, int kmax, const std::optional<McOptions>& mc = std::nullopt,
                                      std::optional<double> beta_c = std::nullopt) {
  if (d < 1) throw ValidationError("sharp_length: d must be >= 1");
  if (kmax < 1) throw ValidationError("sharp_length: kmax must be >= 1");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ValidationError("sharp_length: beta must be finite and >= 0");
  if (beta_c && beta >= *beta_c) throw ValidationError("sharp_length: beta must lie below beta_c");
  SharpLengthResult res;
  res.beta = beta;
  for (int j = 0; j <= kmax; ++j) {
    auto g = build_box(d, j, false);
    std::vector<std::uint32_t> all(g.lattice_vertex_count());
    for (std::uint32_t v = 0; v < all.size(); ++v) all[v] = v;
    SubsetRegion S(g, all, g.origin());
    auto phi = phi_S(S, beta, mc, PhiMode::automatic, box_descriptor(j));
    res.phi = phi;
    if (phi.value < 0.1) {
      res.k = std::max(1, j);
      res.witness = phi.region;
      return res;
    }
  }
  res.exceeded = true;
  res.k = 0;
  res.witness.clear();
  return res;
}

struct DiagramsResult {
  DiagramResult bubble;
  DiagramResult triangle;
  DiagramResult susceptibility;  // Σ_y ⟨σ_0σ_y⟩ at the origin
};

// B and ∇ on Λ_N (free boundary). Exact when the box is enumerable; otherwise three
// independent SW replicas per sample: bubble at x is |C¹(x) ∩ C³(x)|, triangle at x is
// Σ_K |C¹(x) ∩ K|·|C³(x) ∩ K| over clusters K of the second replica.
inline DiagramsResult diagrams(int d, int N, double beta, const McOptions& o, std::size_t root_limit = 32) {
  validate_box(d, N, beta);
  validate_options(o);
  auto g = build_box(d, N, false);
  const std::size_t nv = g.lattice_vertex_count();
  const std::string region = box_descriptor(N);
  DiagramsResult res;
  auto init = [&](DiagramResult& r, const char* q) {
    r.quantity = q;
    r.region = region;
    r.beta = beta;
  };
  init(res.bubble, "bubble");
  init(res.triangle, "triangle");
  init(res.susceptibility, "susceptibility");

  if (nv <= default_spin_budget) {
    IsingTable t(g, CouplingSpec::uniform(beta));
    std::vector<std::vector<double>> G(nv, std::vector<double>(nv));
    for (std::uint32_t x = 0; x < nv; ++x)
      for (std::uint32_t y = x; y < nv; ++y) G[x][y] = G[y][x] = t.two(x, y);
    for (auto* r : {&res.bubble, &res.triangle, &res.susceptibility}) r->exact = true;
    res.bubble.value = res.triangle.value = -1;
    for (std::uint32_t x = 0; x < nv; ++x) {
      double b = 0, tr = 0;
      for (std::uint32_t y = 0; y < nv; ++y) {
        b += G[x][y] * G[x][y];
        for (std::uint32_t z = 0; z < nv; ++z) tr += G[x][y] * G[y][z] * G[z][x];
      }
      if (b > res.bubble.value) {
        res.bubble.value = b;
        res.bubble.root = x;
      }
      if (tr > res.triangle.value) {
        res.triangle.value = tr;
        res.triangle.root = x;
      }
    }
    for (std::uint32_t y = 0; y < nv; ++y) res.susceptibility.value += G[g.origin()][y];
    res.susceptibility.root = g.origin();
    return res;
  }

  auto roots = detail::diagram_roots(g, root_limit);
  const std::size_t R = roots.size();
  const std::uint32_t org = g.origin();
  auto spec = CouplingSpec::uniform(beta);
  // series[k]: k < R bubble at roots[k], R ≤ k < 2R triangle, 2R susceptibility
  auto data = run_indexed(static_cast<std::size_t>(o.chains), o.threads, [&](std::size_t c) {
    std::vector<SamplerState> rep;
    for (std::size_t i = 0; i < 3; ++i) rep.emplace_back(g, spec, Rng::stream(o.seed, 3 * c + i));
    auto size_obs = [org](SamplerState& st, double* out) { out[0] = st.clusters.component_size(org); };
    for (auto& st : rep) thermalize(st, size_obs, 1, o.burn_in);
    std::vector<std::vector<double>> out(2 * R + 1);
    for (auto& v : out) v.reserve(static_cast<std::size_t>(o.sweeps));
    std::vector<std::uint32_t> L1(nv), L2(nv), L3(nv);
    std::vector<std::uint32_t> start1(nv + 2), start3(nv + 2), mem1(nv), mem3(nv);
    std::vector<std::uint32_t> mark(nv, 0), cnt(nv + 1, 0);
    std::uint32_t epoch = 0;
    auto bucket = [&](SamplerState& st, std::vector<std::uint32_t>& L, std::vector<std::uint32_t>* start,
                      std::vector<std::uint32_t>* mem) {
      for (std::uint32_t v = 0; v < nv; ++v) L[v] = st.clusters.find(v);
      if (!start) return;
      std::fill(start->begin(), start->end(), 0);
      for (std::uint32_t v = 0; v < nv; ++v) ++(*start)[L[v] + 1];
      for (std::size_t i = 1; i < start->size(); ++i) (*start)[i] += (*start)[i - 1];
      auto pos = *start;
      for (std::uint32_t v = 0; v < nv; ++v) (*mem)[pos[L[v]]++] = v;
    };
    for (long t = 0; t < o.sweeps; ++t) {
      for (auto& st : rep) sw_sweep(st);
      bucket(rep[0], L1, &start1, &mem1);
      bucket(rep[1], L2, nullptr, nullptr);
      bucket(rep[2], L3, &start3, &mem3);
      for (std::size_t k = 0; k < R; ++k) {
        auto x = roots[k];
        auto b1 = start1[L1[x]], e1 = start1[L1[x] + 1];
        auto b3 = start3[L3[x]], e3 = start3[L3[x] + 1];
        ++epoch;
        for (auto i = b1; i < e1; ++i) {
          mark[mem1[i]] = epoch;
          ++cnt[L2[mem1[i]]];
        }
        double bub = 0, tri = 0;
        for (auto i = b3; i < e3; ++i) {
          auto v = mem3[i];
          if (mark[v] == epoch) bub += 1;
          tri += cnt[L2[v]];
        }
        for (auto i = b1; i < e1; ++i) cnt[L2[mem1[i]]] = 0;
        out[k].push_back(bub);
        out[R + k].push_back(tri);
      }
      out[2 * R].push_back(static_cast<double>(start1[L1[org] + 1] - start1[L1[org]]));
    }
    return out;
  });
  auto best = [&](std::size_t off, DiagramResult& r) {
    double top = -1;
    for (std::size_t k = 0; k < R; ++k) {
      auto c = combine_chains(observable_slice(data, off + k));
      if (c.mean > top) {
        top = c.mean;
        r.value = c.mean;
        r.se = c.se;
        r.nsamples = c.n;
        r.root = roots[k];
      }
    }
  };
  best(0, res.bubble);
  best(R, res.triangle);
  auto c = combine_chains(observable_slice(data, 2 * R));
  res.susceptibility.value = c.mean;
  res.susceptibility.se = c.se;
  res.susceptibility.nsamples = c.n;
  res.susceptibility.root = org;
  return res;
}

// ⟨σ_0 σ_x⟩ on Λ_N (free) for each target x, via the FK connection estimator 1[0 ↔ x].
inline std::vector<Estimate> estimate_two_point(int d, int N, double beta, const std::vector<std::uint32_t>& targets,
                                                const McOptions& o) {
  validate_box(d, N, beta);
  auto t0 = std::chrono::steady_clock::now();
  auto g = build_box(d, N, false);
  for (auto x : targets)
    if (x >= g.lattice_vertex_count()) throw ValidationError("two_point: target outside the box");
  auto data = sw_series(g, CouplingSpec::uniform(beta), o, targets.size(), [&] {
    return [&g, &targets](SamplerState& st, double* out) {
      for (std::size_t i = 0; i < targets.size(); ++i) out[i] = st.clusters.same(g.origin(), targets[i]) ? 1.0 : 0.0;
    };
  });
  double wall = seconds_since(t0);
  std::vector<Estimate> res;
  for (std::size_t i = 0; i < targets.size(); ++i)
    res.push_back(make_estimate(combine_chains(observable_slice(data, i)),
                                ParamRecord{"two_point", d, N, static_cast<int>(targets[i]), beta, 0.0, "free"}, o.seed,
                                wall));
  return res;
}

// P^{∅,∅}[0 ↔ x in n1 + n2] on Λ_N for each target x.
inline std::vector<Estimate> drc_two_point(int d, int N, double beta, const std::vector<std::uint32_t>& targets,
                                           const McOptions& o) {
  validate_box(d, N, beta);
  auto t0 = std::chrono::steady_clock::now();
  auto g = build_box(d, N, false);
  for (auto x : targets)
    if (x >= g.lattice_vertex_count()) throw ValidationError("drc_two_point: target outside the box");
  auto data = drc_series(g, CouplingSpec::uniform(beta), o, targets.size(), [&] {
    return [&g, &targets](const BondConfig& tr, double* out) {
      auto uf = bond_clusters(g, tr, false);
      for (std::size_t i = 0; i < targets.size(); ++i) out[i] = uf.same(g.origin(), targets[i]) ? 1.0 : 0.0;
    };
  });
  double wall = seconds_since(t0);
  std::vector<Estimate> res;
  for (std::size_t i = 0; i < targets.size(); ++i)
    res.push_back(make_estimate(combine_chains(observable_slice(data, i)),
                                ParamRecord{"drc_two_point", d, N, static_cast<int>(targets[i]), beta, 0.0, "free"},
                                o.seed, wall));
  return res;
}

}  // namespace critical_arm
