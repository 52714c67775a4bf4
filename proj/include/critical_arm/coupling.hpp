#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "errors.hpp"
#include "lattice.hpp"

namespace critical_arm {

// free: no boundary term. plus: exterior spins +1 through finite couplings (a boundary field).
// pinned: boundary vertices of the graph fixed to +1 (wired FK). tau: explicit exterior spins.
enum class Boundary : std::uint8_t { free, plus, pinned, tau };

inline const char* to_string(Boundary b) {
  switch (b) {
    case Boundary::free: return "free";
    case Boundary::plus: return "plus";
    case Boundary::pinned: return "wired";
    case Boundary::tau: return "tau";
  }
  return "?";
}

struct CouplingSpec {
  std::vector<double> J{0.0};  // one entry = uniform
  std::vector<double> h{0.0};  // one entry = uniform
  Boundary bc = Boundary::free;
  std::vector<double> ext;     // per lattice vertex boundary field; empty = none

  double coupling(std::size_t e) const { return J.size() == 1 ? J[0] : J[e]; }
  double field(std::size_t x) const { return h.size() == 1 ? h[0] : h[x]; }
  double boundary_field(std::size_t x) const { return ext.empty() ? 0.0 : ext[x]; }
  double total_field(std::size_t x) const { return field(x) + boundary_field(x); }
  bool uniform_coupling() const { return J.size() == 1; }
  bool has_field() const {
    for (double v : h)
      if (v != 0.0) return true;
    for (double v : ext)
      if (v != 0.0) return true;
    return false;
  }
  bool pinned(const LatticeGraph& g, std::uint32_t x) const { return bc == Boundary::pinned && g.is_boundary(x); }

  double max_coupling() const {
    double m = 0;
    for (double v : J) m = std::max(m, v);
    return m;
  }

  static CouplingSpec uniform(double beta, double field = 0.0, Boundary b = Boundary::free) {
    CouplingSpec s;
    s.J = {beta};
    s.h = {field};
    s.bc = b;
    return s;
  }

  // Plus boundary: every missing Z^d neighbor contributes coupling `jext` to the field.
  static CouplingSpec plus(const LatticeGraph& g, std::vector<double> J, std::vector<double> h, double jext) {
    CouplingSpec s;
    s.J = std::move(J);
    s.h = std::move(h);
    s.bc = Boundary::plus;
    s.ext.assign(g.lattice_vertex_count(), 0.0);
    auto all = SubsetRegion(g, all_vertices(g), g.origin());
    for (const auto& p : edge_boundary(all))
      if (p.exterior) s.ext[p.u] += jext;
    return s;
  }

  // Plus boundary with per-exterior-edge couplings supplied by `jext(u, direction, sign)`.
  template <class F>
  static CouplingSpec plus_with(const LatticeGraph& g, std::vector<double> J, std::vector<double> h, F&& jext) {
    CouplingSpec s;
    s.J = std::move(J);
    s.h = std::move(h);
    s.bc = Boundary::plus;
    s.ext.assign(g.lattice_vertex_count(), 0.0);
    auto all = SubsetRegion(g, all_vertices(g), g.origin());
    for (const auto& p : edge_boundary(all))
      if (p.exterior) s.ext[p.u] += jext(p.u, p.direction, p.sign);
    return s;
  }

  // Explicit exterior spins keyed by exterior coordinates; missing keys mean tau = 0.
  static CouplingSpec with_tau(const LatticeGraph& g, std::vector<double> J, std::vector<double> h, double jext,
                               const std::map<std::vector<int>, int>& tau) {
    CouplingSpec s;
    s.J = std::move(J);
    s.h = std::move(h);
    s.bc = Boundary::tau;
    s.ext.assign(g.lattice_vertex_count(), 0.0);
    std::map<std::vector<int>, int> used;
    auto all = SubsetRegion(g, all_vertices(g), g.origin());
    for (const auto& p : edge_boundary(all)) {
      if (!p.exterior) continue;
      auto c = g.coords(p.u);
      c[p.direction] += p.sign;
      auto it = tau.find(c);
      if (it != tau.end()) {
        if (it->second < -1 || it->second > 1) throw ValidationError("tau values must lie in {-1,0,1}");
        s.ext[p.u] += jext * it->second;
        used[c] = 1;
      }
    }
    if (used.size() != tau.size()) throw ValidationError("tau assigns a vertex not adjacent to the graph");
    return s;
  }

  void validate(const LatticeGraph& g) const {
    if (J.size() != 1 && J.size() != g.lattice_edge_count()) throw ValidationError("coupling: J size mismatch");
    if (h.size() != 1 && h.size() != g.lattice_vertex_count()) throw ValidationError("coupling: h size mismatch");
    if (!ext.empty() && ext.size() != g.lattice_vertex_count()) throw ValidationError("coupling: ext size mismatch");
    for (double v : J)
      if (!(v >= 0.0)) throw ValidationError("coupling: J must be >= 0");
    for (double v : h)
      if (!(v >= 0.0)) throw ValidationError("coupling: h must be >= 0");
    if (bc != Boundary::tau)
      for (double v : ext)
        if (!(v >= 0.0)) throw ValidationError("coupling: boundary field must be >= 0");
    if (bc == Boundary::pinned && g.boundary().empty()) throw ValidationError("coupling: wired needs a boundary");
  }

 private:
  static std::vector<std::uint32_t> all_vertices(const LatticeGraph& g) {
    std::vector<std::uint32_t> v(g.lattice_vertex_count());
    for (std::uint32_t i = 0; i < v.size(); ++i) v[i] = i;
    return v;
  }
};

inline double bond_probability(double J) { return -std::expm1(-2.0 * J); }

}  // namespace critical_arm
