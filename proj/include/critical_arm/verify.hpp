#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cluster_law.hpp"
#include "exact_current.hpp"
#include "exact_fk.hpp"
#include "exact_spin.hpp"
#include "inequalities.hpp"
#include "swendsen_wang.hpp"
#include "worm.hpp"

namespace critical_arm {

inline const std::vector<std::string>& verify_suite_names() {
  static const std::vector<std::string> names{"exact", "inequalities", "entropy", "samplers"};
  return names;
}

inline InequalityReport report_row(std::string name, std::uint64_t seed, std::string inst, double lhs, double rhs) {
  InequalityReport r;
  r.name = std::move(name);
  r.instance_seed = seed;
  r.instance = std::move(inst);
  r.left = lhs;
  r.right = rhs;
  r.margin = rhs - lhs;
  r.pass = r.margin >= 0.0;
  return r;
}

namespace verify {

inline constexpr double es_tolerance = 1e-12;
inline constexpr double tv_tolerance = 0.01;

// Random admissible spec on a family graph: free, field through the ghost, plus, or wired.
inline CouplingSpec random_spec(Rng& r, const LatticeGraph& g, int variant) {
  CouplingSpec s;
  s.J = ineq::random_J(r, g);
  std::vector<double> h(g.lattice_vertex_count(), 0.0);
  if (variant == 1) {
    for (auto& x : h) x = ineq::uni(r, 0.0, 0.5);
    s.h = h;
  } else if (variant == 2) {
    s = CouplingSpec::plus(g, s.J, h, ineq::uni(r, 0.1, 1.0));
  } else if (variant == 3) {
    s.bc = Boundary::pinned;
  }
  return s;
}

// Edwards–Sokal: P[x ↔ y] = ⟨σ_xσ_y⟩ and P[x ↔ ghost] = ⟨σ_x⟩ for all vertices.
inline InequalityReport es_instance(std::uint64_t seed) {
  Rng r(seed);
  int variant = static_cast<int>(r.below(4));
  std::string desc;
  bool ghost = variant == 1 || variant == 2;
  auto g = ineq::family_graph(r, desc, ghost, variant == 0 || variant == 1);
  if (variant == 3 && g.boundary().empty()) variant = 0;
  auto s = random_spec(r, g, variant);
  const std::uint32_t nv = static_cast<std::uint32_t>(g.lattice_vertex_count());
  IsingTable t(g, s);
  std::vector<std::function<bool(const BondConfig&, UnionFind&)>> ev;
  std::vector<double> spin;
  for (std::uint32_t x = 0; x < nv; ++x) {
    for (std::uint32_t y = x + 1; y < nv; ++y) {
      ev.push_back([x, y](const BondConfig&, UnionFind& uf) { return uf.same(x, y); });
      spin.push_back(t.two(x, y));
    }
    if (s.has_field() || s.bc == Boundary::pinned) {
      ev.push_back([x, nv](const BondConfig&, UnionFind& uf) { return uf.same(x, nv); });
      spin.push_back(t.one(x));
    }
  }
  auto fk = fk_event_probabilities(g, s, ev);
  double gap = 0;
  for (std::size_t i = 0; i < fk.size(); ++i) gap = std::max(gap, std::abs(fk[i] - spin[i]));
  return report_row("es_identity", seed, desc + "/" + to_string(s.bc), gap, es_tolerance);
}

inline LatticeGraph small_current_graph(Rng& r, std::string& desc) {
  switch (r.below(4)) {
    case 0: desc = "path3"; return ineq::path_graph(3, false);
    case 1: desc = "path4"; return ineq::path_graph(4, false);
    case 2: desc = "triangle"; return ineq::triangle_graph(false);
    default: desc = "box2x2"; return LatticeGraph::rect({2, 2}, {0, 0}, false);
  }
}

// Switching identity on (G ⊂ H) with sources A ⊂ V(G), B arbitrary; gap within the truncation residual.
inline InequalityReport switching_instance(std::uint64_t seed, int Nmax = 8) {
  Rng r(seed);
  std::string desc;
  auto H = small_current_graph(r, desc);
  CouplingSpec s;
  s.J.resize(H.lattice_edge_count());
  for (auto& j : s.J) j = ineq::uni(r, 0.1, 0.8);
  std::vector<std::uint8_t> mask(H.edge_count(), 1);
  std::size_t drop = r.below(H.edge_count());
  if (r.coin()) mask[drop] = 0;
  std::vector<std::uint32_t> inG;
  for (std::uint32_t v = 0; v < H.vertex_count(); ++v)
    for (std::size_t e = 0; e < H.edge_count(); ++e)
      if (mask[e] && (H.edges()[e].u == v || H.edges()[e].v == v)) {
        inG.push_back(v);
        break;
      }
  auto two = [&](const std::vector<std::uint32_t>& from) {
    auto a = ineq::pick(r, from), b = ineq::pick(r, from);
    if (a == b) return std::vector<std::uint32_t>{};
    return std::vector<std::uint32_t>{a, b};
  };
  std::vector<std::uint32_t> all(H.vertex_count());
  for (std::uint32_t v = 0; v < all.size(); ++v) all[v] = v;
  auto A = two(inG);
  auto B = two(all);
  std::size_t fe = r.below(H.edge_count());
  double c = ineq::uni(r, 0.0, 0.3);
  auto F = [fe, c](std::span<const int> n) { return 1.0 + c * (n[fe] % 3); };
  auto res = verify_switching(H, mask, s, A, B, F, 1.0 + 2 * c, Nmax);
  return report_row("switching", seed, desc, res.gap, res.residual);
}

// ⟨σ_A⟩ = Σ_{∂n=A} w / Σ_{∂n=∅} w within the truncation residual.
inline InequalityReport ratio_instance(std::uint64_t seed, int Nmax = 30) {
  Rng r(seed);
  std::string desc;
  bool field = r.coin();
  auto g = ineq::family_graph(r, desc, field, !field);
  CouplingSpec s;
  s.J = ineq::random_J(r, g);
  if (field) {
    s.h.assign(g.lattice_vertex_count(), 0.0);
    for (auto& x : s.h) x = ineq::uni(r, 0.0, 0.5);
  }
  auto A = ineq::random_subset(r, g, 4);
  double spin = spin_expectation(g, s, A);
  // σ_g = +1: odd source sets close through the ghost
  if (field && A.size() % 2 == 1) A.push_back(g.ghost());
  auto cr = current_ratio(g, s, A, Nmax);
  return report_row("ratio_identity", seed, desc, std::abs(cr.value - spin), cr.residual + 1e-12);
}

}  // namespace verify

inline std::vector<InequalityReport> run_exact_suite(std::size_t es_count, std::size_t switching_count,
                                                     std::size_t ratio_count, std::uint64_t master) {
  std::vector<InequalityReport> out;
  for (std::size_t i = 0; i < es_count; ++i) out.push_back(verify::es_instance(instance_seed(master, 100, i)));
  for (std::size_t i = 0; i < switching_count; ++i)
    out.push_back(verify::switching_instance(instance_seed(master, 101, i)));
  for (std::size_t i = 0; i < ratio_count; ++i) out.push_back(verify::ratio_instance(instance_seed(master, 102, i)));
  return out;
}

// Relative-entropy checks on the root cluster law of 2×2 and 2×3 boxes over a grid of (p', p).
inline std::vector<InequalityReport> run_entropy_suite() {
  std::vector<InequalityReport> out;
  const std::vector<std::pair<std::string, LatticeGraph>> boxes{
      {"box2x2", LatticeGraph::rect({2, 2}, {0, 0}, false)}, {"box2x3", LatticeGraph::rect({2, 3}, {0, 1}, false)}};
  const std::vector<std::pair<double, double>> grid{{0.1, 0.2}, {0.2, 0.1}, {0.3, 0.35}, {0.35, 0.3}, {0.4, 0.6},
                                                    {0.6, 0.4}, {0.5, 0.55}, {0.7, 0.75}, {0.2, 0.8}, {0.85, 0.9}};
  std::uint64_t k = 0;
  for (const auto& [desc, g] : boxes) {
    auto root = g.origin();
    auto arm = [&](std::uint64_t c) {
      for (auto v : cluster_vertices(g, c, root))
        if (v != root) return true;
      return false;
    };
    for (const auto& [pp, p] : grid) {
      auto a = cluster_law(g, pp, root), b = cluster_law(g, p, root);
      std::string inst = desc + "/p'=" + std::to_string(pp) + "/p=" + std::to_string(p);
      double H = relative_entropy(a, b);
      out.push_back(report_row("entropy_nonnegative", k, inst, -H, 0.0));
      double qa = a.probability(arm), qb = b.probability(arm);
      out.push_back(report_row("pinsker_one_arm", k, inst, std::abs(qa - qb), pinsker_bound(qa, qb, H) + 1e-15));
      out.push_back(report_row("entropy_self", k, inst, std::abs(relative_entropy(a, a)), 1e-15));
      const double dp = 1e-5;
      double Hp = relative_entropy(a, cluster_law(g, pp + dp, root));
      double Hm = relative_entropy(a, cluster_law(g, pp - dp, root));
      out.push_back(report_row("entropy_derivative", k, inst, std::abs((Hp - Hm) / (2 * dp)), 1e-6));
      ++k;
    }
  }
  return out;
}

namespace verify {

inline double tv_distance(const std::map<std::uint64_t, double>& exact, const std::map<std::uint64_t, double>& emp) {
  double t = 0;
  for (const auto& [k, v] : exact) {
    auto it = emp.find(k);
    t += std::abs(v - (it == emp.end() ? 0.0 : it->second));
  }
  for (const auto& [k, v] : emp)
    if (!exact.count(k)) t += v;
  return t / 2;
}

inline std::uint64_t bond_key(const BondConfig& b, std::size_t E) {
  std::uint64_t m = 0;
  for (std::size_t e = 0; e < E; ++e)
    if (b[e]) m |= std::uint64_t{1} << e;
  return m;
}

inline std::map<std::uint64_t, double> exact_fk_law(const LatticeGraph& g, const CouplingSpec& s) {
  std::map<std::uint64_t, double> law;
  FkEnumerator en(g, s);
  double Z = 0;
  const std::size_t E = g.lattice_edge_count();
  en.for_each([&](const BondConfig& b, UnionFind&, double w) {
    law[bond_key(b, E)] += w;
    Z += w;
  });
  for (auto& [k, v] : law) v /= Z;
  return law;
}

inline InequalityReport sw_spin_gate(const LatticeGraph& g, const CouplingSpec& s, std::string desc, long samples,
                                     std::uint64_t seed) {
  std::map<std::uint64_t, double> exact;
  const std::size_t n = g.lattice_vertex_count();
  double Z = 0;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
    double H = 0;
    auto sg = [&](std::uint32_t v) { return ((m >> v) & 1) ? -1.0 : 1.0; };
    for (std::size_t e = 0; e < g.lattice_edge_count(); ++e)
      H += s.coupling(e) * sg(g.edges()[e].u) * sg(g.edges()[e].v);
    for (std::uint32_t v = 0; v < n; ++v) H += s.total_field(v) * sg(v);
    exact[m] = std::exp(H);
    Z += exact[m];
  }
  for (auto& [k, v] : exact) v /= Z;
  SamplerState st(g, s, Rng(seed));
  for (int i = 0; i < 1000; ++i) sw_sweep(st);
  std::map<std::uint64_t, double> emp;
  for (long t = 0; t < samples; ++t) {
    sw_sweep(st);
    std::uint64_t m = 0;
    for (std::uint32_t v = 0; v < n; ++v)
      if (st.spins[v] < 0) m |= std::uint64_t{1} << v;
    emp[m] += 1.0 / static_cast<double>(samples);
  }
  return report_row("sw_spin_tv", seed, desc, tv_distance(exact, emp), tv_tolerance);
}

inline InequalityReport fk_marginal_gate(const LatticeGraph& g, const CouplingSpec& s, std::string desc, long samples,
                                         std::uint64_t seed) {
  auto exact = exact_fk_law(g, s);
  const std::size_t E = g.lattice_edge_count();
  SamplerState st(g, s, Rng(seed));
  for (int i = 0; i < 1000; ++i) sw_sweep(st);
  std::map<std::uint64_t, double> emp;
  for (long t = 0; t < samples; ++t) {
    sw_sweep(st);
    emp[bond_key(st.bonds, E)] += 1.0 / static_cast<double>(samples);
  }
  return report_row("fk_marginal_tv", seed, desc, tv_distance(exact, emp), tv_tolerance);
}

// Closed-sample law of the worm against enumeration truncated at Nmax (mass beyond counts as error).
inline InequalityReport worm_gate(const LatticeGraph& g, double beta, std::vector<std::uint32_t> A, int Nmax,
                                  std::string desc, long samples, std::uint64_t seed) {
  std::vector<double> w(g.edge_count(), beta);
  auto cur = enumerate_currents(g, w, A, Nmax);
  std::map<std::vector<std::uint32_t>, double> exact, emp;
  double Z = 0;
  for (const auto& c : cur) {
    exact[std::vector<std::uint32_t>(c.n.begin(), c.n.end())] += c.weight;
    Z += c.weight;
  }
  for (auto& [k, v] : exact) v /= Z;
  WormState st(g, CouplingSpec::uniform(beta), A, Rng(seed));
  for (int i = 0; i < 1000; ++i) worm_sweep(st);
  long got = 0;
  while (got < samples)
    worm_sweep(st, [&](const WormState& s) {
      if (got < samples) {
        emp[s.current.n] += 1;
        ++got;
      }
    });
  double t = 0;
  for (auto& [k, v] : emp) v /= static_cast<double>(samples);
  for (const auto& [k, v] : exact) {
    auto it = emp.find(k);
    t += std::abs(v - (it == emp.end() ? 0.0 : it->second));
  }
  for (const auto& [k, v] : emp)
    if (!exact.count(k)) t += v;
  return report_row("worm_tv", seed, desc, t / 2, tv_tolerance);
}

// Sprinkled sourceless currents against the free FK law.
inline InequalityReport sprinkle_gate(const LatticeGraph& g, double beta, std::string desc, long samples,
                                      std::uint64_t seed) {
  auto s = CouplingSpec::uniform(beta);
  auto exact = exact_fk_law(g, s);
  const std::size_t E = g.lattice_edge_count();
  WormState st(g, s, {}, Rng(seed));
  for (int i = 0; i < 1000; ++i) worm_sweep(st);
  Rng r(seed ^ 0x5bd1e995ULL);
  std::map<std::uint64_t, double> emp;
  for (long t = 0; t < samples; ++t) {
    advance_to_closed(st);
    emp[bond_key(sprinkle_to_fk(g, st.current, s, r), E)] += 1.0 / static_cast<double>(samples);
  }
  return report_row("sprinkle_tv", seed, desc, tv_distance(exact, emp), tv_tolerance);
}

}  // namespace verify

inline std::vector<InequalityReport> run_sampler_suite(long samples, std::uint64_t seed) {
  using namespace verify;
  std::vector<InequalityReport> out;
  auto b22 = LatticeGraph::rect({2, 2}, {0, 0}, false);
  auto b23 = LatticeGraph::rect({2, 3}, {0, 1}, false);
  out.push_back(sw_spin_gate(b23, CouplingSpec::uniform(0.4, 0.1), "box2x3/beta=0.4/h=0.1", samples, seed));
  out.push_back(sw_spin_gate(ineq::path_graph(5, false), CouplingSpec::uniform(0.5), "path5/beta=0.5", samples, seed + 1));
  out.push_back(fk_marginal_gate(b22, CouplingSpec::uniform(0.5), "box2x2/beta=0.5", samples, seed + 2));
  out.push_back(fk_marginal_gate(b23, CouplingSpec::uniform(0.4), "box2x3/beta=0.4", samples, seed + 3));
  out.push_back(worm_gate(b22, 0.4, {}, 12, "cycle4/A=empty/beta=0.4", samples, seed + 4));
  out.push_back(worm_gate(b22, 0.4, {0, 3}, 12, "cycle4/A=opposite/beta=0.4", samples, seed + 5));
  out.push_back(sprinkle_gate(b22, 0.5, "box2x2/beta=0.5", samples, seed + 6));
  return out;
}

}  // namespace critical_arm
