#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "bonds.hpp"
#include "coupling.hpp"
#include "errors.hpp"
#include "estimate.hpp"
#include "lattice.hpp"
#include "rng.hpp"
#include "swendsen_wang.hpp"

namespace critical_arm {

struct CurrentConfig {
  std::vector<std::uint32_t> n;        // per graph edge
  std::vector<std::uint32_t> sources;  // cached ∂n, sorted

  static std::vector<std::uint32_t> compute_sources(const LatticeGraph& g, const std::vector<std::uint32_t>& n) {
    std::vector<std::uint8_t> par(g.vertex_count() + 1, 0);
    for (std::size_t e = 0; e < n.size(); ++e)
      if (n[e] & 1) {
        par[g.edges()[e].u] ^= 1;
        par[g.edges()[e].v] ^= 1;
      }
    std::vector<std::uint32_t> s;
    for (std::uint32_t v = 0; v < par.size(); ++v)
      if (par[v]) s.push_back(v);
    return s;
  }
  bool consistent(const LatticeGraph& g) const { return compute_sources(g, n) == sources; }
  BondConfig trace() const {
    BondConfig b(n.size());
    for (std::size_t e = 0; e < n.size(); ++e) b.open[e] = n[e] > 0;
    return b;
  }
};

// Worm chain on lattice edges with weights Π w_e^{n_e}/n_e!. Each step picks one of D slots at
// the head (D = max degree; empty slots reject), proposes +1 or −1 with equal probability and
// moves the head on acceptance. Closed configurations are relocated to a uniform vertex.
class WormState {
 public:
  WormState(const LatticeGraph& g, const CouplingSpec& s, std::vector<std::uint32_t> target, Rng rng,
            std::size_t steps_per_sweep = 0)
      : rng(rng), g_(&g), target_(std::move(target)) {
    s.validate(g);
    if (s.bc != Boundary::free) throw ValidationError("worm: only free boundary is supported");
    if (s.has_field()) throw ValidationError("worm: fields are not supported by the sampler");
    std::sort(target_.begin(), target_.end());
    if (!(target_.empty() || (target_.size() == 2 && target_[0] != target_[1])))
      throw ValidationError("worm: target must be empty or a pair of distinct vertices");
    for (auto v : target_)
      if (v >= g.lattice_vertex_count()) throw ValidationError("worm: target outside graph");
    const std::size_t nv = g.lattice_vertex_count();
    w_.assign(g.lattice_edge_count(), 0.0);
    for (std::size_t e = 0; e < w_.size(); ++e) w_[e] = s.coupling(e);
    off_.assign(nv + 1, 0);
    for (std::uint32_t v = 0; v < nv; ++v) {
      for (auto e : g.incident(v))
        if (!g.is_ghost_edge(e)) slot_.push_back(e);
      off_[v + 1] = slot_.size();
      D_ = std::max<std::size_t>(D_, off_[v + 1] - off_[v]);
    }
    if (D_ == 0) D_ = 1;
    current.n.assign(g.edge_count(), 0);
    steps_ = steps_per_sweep ? steps_per_sweep : std::max<std::size_t>(nv, 1);
    tail = head = g.origin();
  }

  const LatticeGraph& graph() const { return *g_; }
  const std::vector<std::uint32_t>& target() const { return target_; }
  std::size_t steps_per_sweep() const { return steps_; }
  bool closed() const { return tail == head; }
  bool at_target() const {
    if (target_.empty()) return closed();
    return !closed() && ((tail == target_[0] && head == target_[1]) || (tail == target_[1] && head == target_[0]));
  }
  void sync_sources() {
    current.sources.clear();
    if (!closed()) current.sources = {std::min(tail, head), std::max(tail, head)};
  }

  void step() {
    const auto v = head;
    std::size_t k = rng.below(D_);
    if (k < off_[v + 1] - off_[v]) {
      auto e = slot_[off_[v] + k];
      auto& ne = current.n[e];
      double w = w_[e];
      if (rng.coin()) {
        if (rng.uniform() * (ne + 1) < w) {
          ++ne;
          head = g_->other(e, v);
        }
      } else if (ne > 0 && rng.uniform() * w < ne) {
        --ne;
        head = g_->other(e, v);
      }
    }
    if (tail == head) tail = head = static_cast<std::uint32_t>(rng.below(g_->lattice_vertex_count()));
  }

  CurrentConfig current;
  std::uint32_t tail = 0, head = 0;
  Rng rng;
  std::uint64_t target_visits = 0;
  std::uint64_t sweeps = 0;

 private:
  const LatticeGraph* g_;
  std::vector<std::uint32_t> target_;
  std::vector<double> w_;
  std::vector<std::size_t> off_;
  std::vector<std::uint32_t> slot_;
  std::size_t D_ = 0;
  std::size_t steps_ = 1;
};

// steps_per_sweep moves; on_sample(state) at every step whose configuration has ∂n = target.
template <class F>
void worm_sweep(WormState& st, F&& on_sample) {
  for (std::size_t i = 0; i < st.steps_per_sweep(); ++i) {
    st.step();
    if (st.at_target()) {
      ++st.target_visits;
      st.sync_sources();
      on_sample(st);
    }
  }
  st.sync_sources();
  ++st.sweeps;
}

inline void worm_sweep(WormState& st) {
  worm_sweep(st, [](const WormState&) {});
}

// Sweeps until the chain is closed at the end of a sweep (the fixed-time grid).
inline void advance_to_closed(WormState& st, std::uint64_t max_sweeps = 100'000'000) {
  for (std::uint64_t i = 0; i < max_sweeps; ++i) {
    worm_sweep(st);
    if (st.closed()) return;
  }
  throw BudgetError("worm: no closed configuration within the sweep limit");
}

// Two independent sourceless chains; each pair of grid-time closed snapshots is one sample.
class DoubleCurrentChain {
 public:
  DoubleCurrentChain(const LatticeGraph& g, const CouplingSpec& s, std::uint64_t seed, std::uint64_t chain,
                     std::size_t steps_per_sweep = 0)
      : a_(g, s, {}, Rng::stream(seed, 2 * chain), steps_per_sweep),
        b_(g, s, {}, Rng::stream(seed, 2 * chain + 1), steps_per_sweep),
        trace_(g.edge_count()) {}

  void burn_in(long sweeps) {
    for (long i = 0; i < sweeps; ++i) {
      worm_sweep(a_);
      worm_sweep(b_);
    }
  }

  // trace(n1 + n2)
  const BondConfig& next() {
    advance_to_closed(a_);
    advance_to_closed(b_);
    const auto& n1 = a_.current.n;
    const auto& n2 = b_.current.n;
    for (std::size_t e = 0; e < n1.size(); ++e) trace_.open[e] = (n1[e] | n2[e]) != 0;
    return trace_;
  }

  const WormState& first() const { return a_; }
  const WormState& second() const { return b_; }

 private:
  WormState a_, b_;
  BondConfig trace_;
};

template <class Factory>
std::vector<std::vector<std::vector<double>>> drc_series(const LatticeGraph& g, const CouplingSpec& s,
                                                         const McOptions& o, std::size_t k, Factory&& factory,
                                                         std::size_t steps_per_sweep = 0) {
  validate_options(o);
  return run_indexed(static_cast<std::size_t>(o.chains), o.threads, [&](std::size_t c) {
    DoubleCurrentChain ch(g, s, o.seed, c, steps_per_sweep);
    ch.burn_in(o.burn_in >= 0 ? o.burn_in : min_burn_in);
    auto obs = factory();
    std::vector<std::vector<double>> out(k);
    std::vector<double> tmp(k);
    for (long t = 0; t < o.sweeps; ++t) {
      const auto& tr = ch.next();
      obs(tr, tmp.data());
      for (std::size_t i = 0; i < k; ++i) out[i].push_back(tmp[i]);
    }
    return out;
  });
}

// Stream of traces of independent sourceless double currents on Λ_N, one chain.
template <class F>
void sample_double_current(int d, int N, double beta, const McOptions& o, F&& f) {
  validate_box(d, N, beta);
  auto g = build_box(d, N, false);
  auto s = CouplingSpec::uniform(beta);
  for (int c = 0; c < o.chains; ++c) {
    DoubleCurrentChain ch(g, s, o.seed, static_cast<std::uint64_t>(c));
    ch.burn_in(o.burn_in >= 0 ? o.burn_in : min_burn_in);
    for (long t = 0; t < o.sweeps; ++t) f(static_cast<const LatticeGraph&>(g), ch.next());
  }
}

// P^{∅,∅}[0 ↔ ∂Λ_m in n1+n2] on Λ_N with free current boundary.
inline std::vector<Estimate> drc_one_arm(int d, int N, const std::vector<int>& ms, double beta, const McOptions& o) {
  validate_box(d, N, beta);
  if (ms.empty()) throw ValidationError("drc: no radii");
  for (int m : ms)
    if (m < 0 || m > N) throw ValidationError("drc: need 0 <= m <= N");
  auto t0 = std::chrono::steady_clock::now();
  auto g = build_box(d, N, false);
  int cap = *std::max_element(ms.begin(), ms.end());
  auto data = drc_series(g, CouplingSpec::uniform(beta), o, ms.size(), [&] {
    return [&ms, cap, probe = ArmProbe(g)](const BondConfig& tr, double* out) mutable {
      int r = probe.radius(tr, cap);
      for (std::size_t i = 0; i < ms.size(); ++i) out[i] = r >= ms[i] ? 1.0 : 0.0;
    };
  });
  double wall = seconds_since(t0);
  std::vector<Estimate> res;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    ParamRecord p{"drc_one_arm", d, N, ms[i], beta, 0.0, "free"};
    res.push_back(make_estimate(combine_chains(observable_slice(data, i)), p, o.seed, wall));
  }
  return res;
}

inline Estimate drc_one_arm(int d, int N, int m, double beta, const McOptions& o) {
  return drc_one_arm(d, N, std::vector<int>{m}, beta, o)[0];
}

// Rank of each edge: (direction, lower endpoint index); ghost edges last.
inline std::vector<std::uint64_t> default_edge_order(const LatticeGraph& g) {
  std::vector<std::uint64_t> rank(g.edge_count());
  const std::uint64_t nv = g.vertex_count() + 1;
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const auto& ed = g.edges()[e];
    std::uint64_t dir = g.is_ghost_edge(e) ? static_cast<std::uint64_t>(g.dim()) + 1
                                           : static_cast<std::uint64_t>(g.edge_direction(e));
    rank[e] = dir * nv + std::min(ed.u, ed.v);
  }
  return rank;
}

struct Backbone {
  std::vector<std::uint32_t> edges;     // oriented path x → y
  std::vector<std::uint32_t> vertices;  // x = v_0, ..., v_k = y
  std::vector<std::uint8_t> explored;   // Γ̄(n) as an edge mask
};

inline Backbone extract_backbone(const LatticeGraph& g, const CurrentConfig& c, const std::vector<std::uint64_t>& rank,
                                 std::uint32_t x, std::uint32_t y) {
  if (c.n.size() != g.edge_count() || rank.size() != g.edge_count())
    throw ValidationError("backbone: size mismatch");
  auto src = CurrentConfig::compute_sources(g, c.n);
  std::vector<std::uint32_t> want{std::min(x, y), std::max(x, y)};
  if (x == y || src != want) throw InconsistentLawError("backbone: sources of the current differ from {x,y}");
  Backbone b;
  b.explored.assign(g.edge_count(), 0);
  b.vertices.push_back(x);
  std::uint32_t cur = x;
  std::vector<std::uint32_t> inc;
  while (cur != y) {
    inc.assign(g.incident(cur).begin(), g.incident(cur).end());
    std::sort(inc.begin(), inc.end(), [&](auto a, auto bb) { return rank[a] < rank[bb]; });
    std::uint32_t chosen = LatticeGraph::npos;
    for (auto e : inc) {
      if (b.explored[e]) continue;
      b.explored[e] = 1;
      if (c.n[e] & 1) {
        chosen = e;
        break;
      }
    }
    if (chosen == LatticeGraph::npos) throw InconsistentLawError("backbone: exploration stuck");
    b.edges.push_back(chosen);
    cur = g.other(chosen, cur);
    b.vertices.push_back(cur);
  }
  return b;
}

inline Backbone extract_backbone(const LatticeGraph& g, const CurrentConfig& c, std::uint32_t x, std::uint32_t y) {
  return extract_backbone(g, c, default_edge_order(g), x, y);
}

// η_e = max(1[n_e > 0], ω_e) with ω_e ~ Bernoulli(1 − e^{−w_e}).
inline BondConfig sprinkle_to_fk(const LatticeGraph& g, const CurrentConfig& c, const CouplingSpec& s, Rng& rng) {
  if (c.n.size() != g.edge_count()) throw ValidationError("sprinkle: size mismatch");
  BondConfig eta(g.edge_count());
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    double w = g.is_ghost_edge(e) ? s.total_field(g.edges()[e].u) : s.coupling(e);
    double q = -std::expm1(-w);
    bool om = q > 0.0 && rng.uniform() < q;
    eta.open[e] = c.n[e] > 0 || om;
  }
  return eta;
}

inline BondConfig sprinkle_to_fk(const LatticeGraph& g, const CurrentConfig& c, double beta, Rng& rng) {
  return sprinkle_to_fk(g, c, CouplingSpec::uniform(beta), rng);
}

}  // namespace critical_arm
