#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "bonds.hpp"
#include "coupling.hpp"
#include "errors.hpp"
#include "lattice.hpp"
#include "union_find.hpp"

namespace critical_arm {

inline constexpr std::size_t default_edge_budget = 24;

// Exhaustive FK enumeration with weights Π p^ω (1-p)^(1-ω) 2^(clusters not touching the ghost).
// Field edges need a ghost vertex in the graph; pinned boundary vertices are wired to the
// ghost node (index lattice_vertex_count()) in the cluster structure.
class FkEnumerator {
 public:
  FkEnumerator(const LatticeGraph& g, const CouplingSpec& s, std::size_t budget = default_edge_budget) : g_(g) {
    s.validate(g);
    if (s.bc == Boundary::tau) throw ValidationError("FK enumeration needs nonnegative boundary fields");
    base_ = BondConfig(g.edge_count());
    for (std::size_t e = 0; e < g.lattice_edge_count(); ++e) add(e, bond_probability(s.coupling(e)));
    const std::uint32_t nv = static_cast<std::uint32_t>(g.lattice_vertex_count());
    for (std::uint32_t x = 0; x < nv; ++x) {
      if (s.pinned(g, x)) {
        wired_.push_back(x);
        if (g.has_ghost()) base_.set(g.ghost_edge(x), true);
        continue;
      }
      double f = s.total_field(x);
      if (f > 0.0 && !g.has_ghost()) throw ValidationError("FK enumeration with a field needs a ghost vertex");
      if (g.has_ghost()) add(g.ghost_edge(x), bond_probability(f));
    }
    if (random_.size() > budget || random_.size() > 40) throw BudgetError("FK enumeration exceeds edge budget");
  }

  std::size_t random_edge_count() const { return random_.size(); }

  // f(bonds, clusters, weight) over all configurations of the random edges.
  template <class F>
  void for_each(F&& f) const {
    const std::size_t R = random_.size();
    const std::size_t nv = g_.lattice_vertex_count();
    const std::uint32_t gh = static_cast<std::uint32_t>(nv);
    BondConfig b = base_;
    UnionFind uf;
    const auto& edges = g_.edges();
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << R); ++m) {
      double w = 1.0;
      for (std::size_t k = 0; k < R; ++k) {
        bool o = (m >> k) & 1;
        b.open[random_[k]] = o;
        w *= o ? p_[k] : 1.0 - p_[k];
      }
      if (w == 0.0) continue;
      uf.reset(nv + 1);
      for (auto x : wired_) uf.unite(x, gh);
      for (std::size_t e = 0; e < b.size(); ++e)
        if (b.open[e]) uf.unite(edges[e].u, edges[e].v);
      auto groot = uf.find(gh);
      int k = 0;
      for (std::uint32_t v = 0; v < nv; ++v)
        if (uf.find(v) == v && v != groot) ++k;
      f(static_cast<const BondConfig&>(b), uf, std::ldexp(w, k));
    }
  }

 private:
  void add(std::size_t e, double p) {
    if (p <= 0.0) return;
    if (p >= 1.0) {
      base_.set(e, true);
      return;
    }
    random_.push_back(static_cast<std::uint32_t>(e));
    p_.push_back(p);
  }

  const LatticeGraph& g_;
  BondConfig base_;
  std::vector<std::uint32_t> random_;
  std::vector<double> p_;
  std::vector<std::uint32_t> wired_;
};

// event(bonds, clusters) -> bool
template <class Event>
double fk_event_probability(const LatticeGraph& g, const CouplingSpec& s, Event&& event,
                            std::size_t budget = default_edge_budget) {
  FkEnumerator en(g, s, budget);
  double Z = 0.0, acc = 0.0;
  en.for_each([&](const BondConfig& b, UnionFind& uf, double w) {
    Z += w;
    if (event(b, uf)) acc += w;
  });
  return acc / Z;
}

template <class Event>
double fk_event_probability(const LatticeGraph& g, double beta, Boundary xi, Event&& event,
                            std::size_t budget = default_edge_budget) {
  if (xi != Boundary::free && xi != Boundary::pinned) throw ValidationError("FK boundary must be free or wired");
  return fk_event_probability(g, CouplingSpec::uniform(beta, 0.0, xi), std::forward<Event>(event), budget);
}

// Several events in one pass.
template <class Event>
std::vector<double> fk_event_probabilities(const LatticeGraph& g, const CouplingSpec& s, const std::vector<Event>& events,
                                           std::size_t budget = default_edge_budget) {
  FkEnumerator en(g, s, budget);
  double Z = 0.0;
  std::vector<double> acc(events.size(), 0.0);
  en.for_each([&](const BondConfig& b, UnionFind& uf, double w) {
    Z += w;
    for (std::size_t i = 0; i < events.size(); ++i)
      if (events[i](b, uf)) acc[i] += w;
  });
  for (auto& a : acc) a /= Z;
  return acc;
}

}  // namespace critical_arm
