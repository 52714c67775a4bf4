#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "bonds.hpp"
#include "coupling.hpp"
#include "errors.hpp"
#include "estimate.hpp"
#include "lattice.hpp"
#include "rng.hpp"
#include "union_find.hpp"

namespace critical_arm {

using SpinConfig = std::vector<std::int8_t>;

// One Swendsen–Wang chain. Node lattice_vertex_count() of `clusters` is the ghost (spin +1);
// pinned vertices are always joined to it, field edges open with probability 1-e^{-2h}.
class SamplerState {
 public:
  SamplerState(const LatticeGraph& g, CouplingSpec s, Rng rng, bool common_random_numbers = false)
      : spins(g.lattice_vertex_count(), 1), rng(rng), g_(&g), spec_(std::move(s)), crn_(common_random_numbers) {
    spec_.validate(g);
    if (spec_.bc == Boundary::tau) throw ValidationError("sampler: tau boundary is not supported");
    const std::size_t nv = g.lattice_vertex_count();
    if (spec_.uniform_coupling()) {
      pe_.emplace_back(bond_probability(spec_.J[0]));
    } else {
      for (double j : spec_.J) pe_.emplace_back(bond_probability(j));
    }
    for (std::uint32_t x = 0; x < nv; ++x) {
      if (spec_.pinned(g, x)) {
        pinned_.push_back(x);
        continue;
      }
      double f = spec_.total_field(x);
      if (f > 0.0) {
        field_.push_back(x);
        pf_.emplace_back(bond_probability(f));
      }
    }
    bonds = BondConfig(g.edge_count());
    stamp_.assign(nv + 1, 0);
    rsign_.assign(nv + 1, 1);
    clusters.reset(nv + 1);
  }

  const LatticeGraph& graph() const { return *g_; }
  const CouplingSpec& spec() const { return spec_; }
  std::uint32_t ghost_node() const { return static_cast<std::uint32_t>(g_->lattice_vertex_count()); }

  SpinConfig spins;
  Rng rng;
  std::uint64_t sweeps = 0;
  std::uint64_t thermalization = 0;
  BondConfig bonds;     // freeze of the last sweep
  UnionFind clusters;   // clusters of the last freeze, ghost included

  friend void sw_sweep(SamplerState& st);

 private:
  const LatticeGraph* g_;
  CouplingSpec spec_;
  bool crn_;
  std::vector<BernoulliThreshold> pe_;
  std::vector<std::uint32_t> pinned_, field_;
  std::vector<BernoulliThreshold> pf_;
  std::vector<std::uint32_t> stamp_;
  std::vector<std::int8_t> rsign_;
  std::uint32_t epoch_ = 0;
};

inline void sw_sweep(SamplerState& st) {
  const LatticeGraph& g = *st.g_;
  const std::size_t nv = g.lattice_vertex_count();
  const std::size_t ne = g.lattice_edge_count();
  const std::uint32_t gh = static_cast<std::uint32_t>(nv);
  const auto& edges = g.edges();
  auto& uf = st.clusters;
  auto& s = st.spins;
  auto& open = st.bonds.open;
  uf.reset(nv + 1);
  const bool uniform = st.pe_.size() == 1;
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& ed = edges[e];
    const auto& th = st.pe_[uniform ? 0 : e];
    bool o;
    if (st.crn_) {
      std::uint64_t r = st.rng.next();
      o = s[ed.u] == s[ed.v] && (th.always || r < th.t);
    } else {
      o = s[ed.u] == s[ed.v] && th(st.rng);
    }
    open[e] = o;
    if (o) uf.unite(ed.u, ed.v);
  }
  for (auto x : st.pinned_) {
    uf.unite(x, gh);
    if (g.has_ghost()) open[g.ghost_edge(x)] = 1;
  }
  for (std::size_t k = 0; k < st.field_.size(); ++k) {
    auto x = st.field_[k];
    const auto& th = st.pf_[k];
    bool o;
    if (st.crn_) {
      std::uint64_t r = st.rng.next();
      o = s[x] > 0 && (th.always || r < th.t);
    } else {
      o = s[x] > 0 && th(st.rng);
    }
    if (g.has_ghost()) open[g.ghost_edge(x)] = o;
    if (o) uf.unite(x, gh);
  }
  const auto gr = uf.find(gh);
  ++st.epoch_;
  if (st.crn_) {
    // one coin per vertex, drawn in index order; a cluster takes the coin of its root
    std::uint64_t word = 0;
    for (std::uint32_t v = 0; v < nv; ++v) {
      if ((v & 63) == 0) word = st.rng.next();
      st.rsign_[v] = ((word >> (v & 63)) & 1) ? 1 : -1;
    }
    for (std::uint32_t v = 0; v < nv; ++v) {
      auto r = uf.find(v);
      s[v] = r == gr ? 1 : st.rsign_[r];
    }
  } else {
    for (std::uint32_t v = 0; v < nv; ++v) {
      auto r = uf.find(v);
      if (r == gr) {
        s[v] = 1;
        continue;
      }
      if (st.stamp_[r] != st.epoch_) {
        st.stamp_[r] = st.epoch_;
        st.rsign_[r] = st.rng.coin() ? 1 : -1;
      }
      s[v] = st.rsign_[r];
    }
  }
  ++st.sweeps;
}

// Edwards–Sokal bond step for a given spin configuration.
inline BondConfig extract_fk(const LatticeGraph& g, const SpinConfig& spins, const CouplingSpec& s, Rng& rng) {
  s.validate(g);
  if (spins.size() != g.lattice_vertex_count()) throw ValidationError("extract_fk: spin vector size mismatch");
  BondConfig b(g.edge_count());
  for (std::size_t e = 0; e < g.lattice_edge_count(); ++e) {
    const auto& ed = g.edges()[e];
    if (spins[ed.u] != spins[ed.v]) continue;
    double p = bond_probability(s.coupling(e));
    b.open[e] = p > 0.0 && rng.uniform() < p;
  }
  if (g.has_ghost())
    for (std::uint32_t x = 0; x < g.lattice_vertex_count(); ++x) {
      if (s.pinned(g, x)) {
        b.open[g.ghost_edge(x)] = 1;
        continue;
      }
      double p = bond_probability(s.total_field(x));
      b.open[g.ghost_edge(x)] = spins[x] > 0 && p > 0.0 && rng.uniform() < p;
    }
  return b;
}

inline std::vector<int> sup_norms(const LatticeGraph& g) {
  std::vector<int> r(g.lattice_vertex_count());
  std::vector<int> c(g.dim());
  for (std::uint32_t v = 0; v < r.size(); ++v) {
    g.coords(v, c.data());
    int m = 0;
    for (int x : c) m = std::max(m, std::abs(x));
    r[v] = m;
  }
  return r;
}

// Largest sup-norm reached by the origin's open lattice cluster, capped at `cap`.
class ArmProbe {
 public:
  explicit ArmProbe(const LatticeGraph& g) : g_(&g), norm_(sup_norms(g)), seen_(g.lattice_vertex_count(), 0) {}

  int radius(const BondConfig& b, int cap) {
    ++epoch_;
    const auto o = g_->origin();
    int best = norm_[o];
    if (best >= cap) return best;
    queue_.clear();
    queue_.push_back(o);
    seen_[o] = epoch_;
    for (std::size_t i = 0; i < queue_.size(); ++i) {
      auto u = queue_[i];
      for (auto e : g_->incident(u)) {
        if (g_->is_ghost_edge(e) || !b.open[e]) continue;
        auto v = g_->other(e, u);
        if (seen_[v] == epoch_) continue;
        seen_[v] = epoch_;
        if (norm_[v] > best) {
          best = norm_[v];
          if (best >= cap) return best;
        }
        queue_.push_back(v);
      }
    }
    return best;
  }

  const std::vector<int>& norms() const { return norm_; }

 private:
  const LatticeGraph* g_;
  std::vector<int> norm_;
  std::vector<std::uint32_t> seen_;
  std::vector<std::uint32_t> queue_;
  std::uint32_t epoch_ = 0;
};

// Burn-in: fixed, or max(500, 20·τ̂) with τ̂ from a pilot of the first observable.
template <class Obs>
long thermalize(SamplerState& st, Obs& obs, std::size_t k, long burn_in) {
  if (burn_in >= 0) {
    for (long i = 0; i < burn_in; ++i) sw_sweep(st);
    st.thermalization = static_cast<std::uint64_t>(burn_in);
    return burn_in;
  }
  std::vector<double> pilot, tmp(std::max<std::size_t>(k, 1));
  for (long i = 0; i < min_burn_in; ++i) {
    sw_sweep(st);
    obs(st, tmp.data());
    pilot.push_back(tmp[0]);
  }
  long target = std::max<long>(min_burn_in, static_cast<long>(std::ceil(burn_in_tau_factor * integrated_autocorrelation(pilot))));
  for (long i = min_burn_in; i < target; ++i) sw_sweep(st);
  st.thermalization = static_cast<std::uint64_t>(target);
  return target;
}

// Per chain: burn-in, then `sweeps` measurements of k observables. Result [chain][obs][t].
template <class Factory>
std::vector<std::vector<std::vector<double>>> sw_series(const LatticeGraph& g, const CouplingSpec& s,
                                                        const McOptions& o, std::size_t k, Factory&& factory) {
  validate_options(o);
  return run_indexed(static_cast<std::size_t>(o.chains), o.threads, [&](std::size_t c) {
    SamplerState st(g, s, Rng::stream(o.seed, c));
    auto obs = factory();
    thermalize(st, obs, k, o.burn_in);
    std::vector<std::vector<double>> out(k);
    for (auto& v : out) v.reserve(static_cast<std::size_t>(o.sweeps));
    std::vector<double> tmp(k);
    for (long t = 0; t < o.sweeps; ++t) {
      sw_sweep(st);
      obs(st, tmp.data());
      for (std::size_t i = 0; i < k; ++i) out[i].push_back(tmp[i]);
    }
    return out;
  });
}

inline std::vector<std::vector<double>> observable_slice(const std::vector<std::vector<std::vector<double>>>& data,
                                                         std::size_t i) {
  std::vector<std::vector<double>> out;
  for (const auto& chain : data) out.push_back(chain[i]);
  return out;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline void validate_box(int d, int N, double beta) {
  if (d < 1) throw ValidationError("d must be >= 1");
  if (N < 1) throw ValidationError("N must be >= 1");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ValidationError("beta must be finite and >= 0");
}

struct OneArmResult {
  std::vector<Estimate> arm;                // one per requested m
  std::optional<Estimate> magnetisation;    // wired only: ⟨σ_0⟩⁺ on Λ_N
};

// P[0 ↔ ∂Λ_m] on Λ_N for each m, free or wired boundary.
inline OneArmResult estimate_one_arm(int d, int N, const std::vector<int>& ms, double beta, Boundary bc,
                                     const McOptions& o) {
  validate_box(d, N, beta);
  if (ms.empty()) throw ValidationError("one-arm: no radii");
  for (int m : ms)
    if (m < 0 || m > N) throw ValidationError("one-arm: need 0 <= m <= N");
  if (bc != Boundary::free && bc != Boundary::pinned) throw ValidationError("one-arm: boundary must be free or wired");
  auto t0 = std::chrono::steady_clock::now();
  auto g = build_box(d, N, false);
  auto spec = CouplingSpec::uniform(beta, 0.0, bc);
  int cap = *std::max_element(ms.begin(), ms.end());
  const std::size_t k = ms.size() + 1;
  auto data = sw_series(g, spec, o, k, [&] {
    return [&g, &ms, cap, probe = ArmProbe(g)](SamplerState& st, double* out) mutable {
      int r = probe.radius(st.bonds, cap);
      for (std::size_t i = 0; i < ms.size(); ++i) out[i] = r >= ms[i] ? 1.0 : 0.0;
      out[ms.size()] = st.spins[g.origin()];
    };
  });
  double wall = seconds_since(t0);
  OneArmResult res;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    ParamRecord p{"one_arm", d, N, ms[i], beta, 0.0, to_string(bc)};
    res.arm.push_back(make_estimate(combine_chains(observable_slice(data, i)), p, o.seed, wall));
  }
  if (bc == Boundary::pinned) {
    ParamRecord p{"magnetisation_wired", d, N, N, beta, 0.0, to_string(bc)};
    res.magnetisation = make_estimate(combine_chains(observable_slice(data, ms.size())), p, o.seed, wall);
  }
  return res;
}

inline Estimate estimate_one_arm(int d, int N, int m, double beta, Boundary bc, const McOptions& o) {
  return estimate_one_arm(d, N, std::vector<int>{m}, beta, bc, o).arm[0];
}

// ⟨σ_0⟩ on Λ_N with free lattice boundary and uniform field h, via P[0 ↔ ghost].
inline Estimate estimate_magnetisation(int d, int N, double beta, double h, const McOptions& o) {
  validate_box(d, N, beta);
  if (!(h >= 0.0) || !std::isfinite(h)) throw ValidationError("magnetisation: h must be >= 0");
  auto t0 = std::chrono::steady_clock::now();
  auto g = build_box(d, N, false);
  auto spec = CouplingSpec::uniform(beta, h, Boundary::free);
  auto data = sw_series(g, spec, o, 1, [&] {
    return [&g](SamplerState& st, double* out) {
      out[0] = st.clusters.same(g.origin(), st.ghost_node()) ? 1.0 : 0.0;
    };
  });
  ParamRecord p{"magnetisation", d, N, 0, beta, h, "free"};
  return make_estimate(combine_chains(observable_slice(data, 0)), p, o.seed, seconds_since(t0));
}

// P[|C(0)| >= t] under the free measure on Λ_N.
inline std::vector<Estimate> estimate_volume_tail(int d, int N, double beta, const std::vector<long>& thresholds,
                                                  const McOptions& o) {
  validate_box(d, N, beta);
  if (thresholds.empty()) throw ValidationError("volume: no thresholds");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (thresholds[i] < 1) throw ValidationError("volume: thresholds must be >= 1");
    if (i && thresholds[i] <= thresholds[i - 1]) throw ValidationError("volume: thresholds must be ascending");
  }
  auto t0 = std::chrono::steady_clock::now();
  auto g = build_box(d, N, false);
  auto spec = CouplingSpec::uniform(beta);
  auto data = sw_series(g, spec, o, thresholds.size(), [&] {
    return [&g, &thresholds](SamplerState& st, double* out) {
      long sz = st.clusters.component_size(g.origin());
      for (std::size_t i = 0; i < thresholds.size(); ++i) out[i] = sz >= thresholds[i] ? 1.0 : 0.0;
    };
  });
  double wall = seconds_since(t0);
  std::vector<Estimate> res;
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    ParamRecord p{"volume_tail", d, N, static_cast<int>(thresholds[i]), beta, 0.0, "free"};
    res.push_back(make_estimate(combine_chains(observable_slice(data, i)), p, o.seed, wall));
  }
  return res;
}

struct EdgeInfluenceResult {
  Estimate sup;                         // sup over edges of the estimated difference
  std::vector<std::uint32_t> edges;     // edges of Λ_{N/2}
  std::vector<Estimate> per_edge;
};

// φ¹_{Λ_N}[ω_e] − φ⁰_{Λ_N}[ω_e] for e in Λ_{N/2}, paired chains on common random numbers.
// Uses φ[ω_e] = p(1 + ⟨σ_xσ_y⟩)/2 sample-wise: p·1[σ_x = σ_y].
inline EdgeInfluenceResult estimate_edge_influence(int d, int N, double beta, const McOptions& o) {
  validate_box(d, N, beta);
  validate_options(o);
  auto t0 = std::chrono::steady_clock::now();
  auto g = build_box(d, N, false);
  auto norms = sup_norms(g);
  std::vector<std::uint32_t> inner;
  for (std::uint32_t e = 0; e < g.lattice_edge_count(); ++e)
    if (norms[g.edges()[e].u] <= N / 2 && norms[g.edges()[e].v] <= N / 2) inner.push_back(e);
  const double p = bond_probability(beta);
  const std::size_t B = std::min<std::size_t>(min_bins, static_cast<std::size_t>(o.sweeps));
  const std::size_t per = static_cast<std::size_t>(o.sweeps) / B;
  auto bins = run_indexed(static_cast<std::size_t>(o.chains), o.threads, [&](std::size_t c) {
    SamplerState wired(g, CouplingSpec::uniform(beta, 0.0, Boundary::pinned), Rng::stream(o.seed, c), true);
    SamplerState freeb(g, CouplingSpec::uniform(beta), Rng::stream(o.seed, c), true);
    long burn = o.burn_in >= 0 ? o.burn_in : min_burn_in;
    for (long i = 0; i < burn; ++i) {
      sw_sweep(wired);
      sw_sweep(freeb);
    }
    std::vector<std::vector<double>> acc(inner.size(), std::vector<double>(B, 0.0));
    for (std::size_t t = 0; t < B * per; ++t) {
      sw_sweep(wired);
      sw_sweep(freeb);
      for (std::size_t i = 0; i < inner.size(); ++i) {
        const auto& ed = g.edges()[inner[i]];
        double a = wired.spins[ed.u] == wired.spins[ed.v] ? p : 0.0;
        double b = freeb.spins[ed.u] == freeb.spins[ed.v] ? p : 0.0;
        acc[i][t / per] += a - b;
      }
    }
    for (auto& row : acc)
      for (auto& x : row) x /= static_cast<double>(per);
    return acc;
  });
  double wall = seconds_since(t0);
  EdgeInfluenceResult res;
  res.edges = inner;
  std::size_t best = 0;
  for (std::size_t i = 0; i < inner.size(); ++i) {
    std::vector<std::vector<double>> chains;
    for (const auto& cb : bins) chains.push_back(cb[i]);
    ParamRecord pr{"edge_influence", d, N, N / 2, beta, 0.0, "wired-free"};
    auto est = make_estimate(combine_chains(chains), pr, o.seed, wall);
    est.nsamples = static_cast<std::size_t>(o.chains) * B * per;
    res.per_edge.push_back(est);
    if (est.mean > res.per_edge[best].mean) best = i;
  }
  res.sup = res.per_edge.at(best);
  return res;
}

}  // namespace critical_arm
