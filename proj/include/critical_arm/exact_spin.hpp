#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "coupling.hpp"
#include "errors.hpp"
#include "lattice.hpp"

namespace critical_arm {

inline constexpr std::size_t default_spin_budget = 20;

// Gray-code walk over {±1}^(free spins) with incremental energy updates.
// Bit i of a configuration set means free spin i is -1.
class IsingEnumerator {
 public:
  IsingEnumerator(const LatticeGraph& g, const CouplingSpec& s, std::size_t budget = default_spin_budget)
      : nv_(g.lattice_vertex_count()), ghost_(g.ghost()) {
    s.validate(g);
    free_index_.assign(nv_, -1);
    for (std::uint32_t v = 0; v < nv_; ++v) {
      if (s.pinned(g, v)) continue;
      free_index_[v] = static_cast<int>(free_.size());
      free_.push_back(v);
    }
    n_ = free_.size();
    if (n_ > budget || n_ > 40) throw BudgetError("spin enumeration exceeds budget");
    f_.assign(n_, 0.0);
    std::vector<std::vector<std::pair<int, double>>> nb(n_);
    for (std::size_t i = 0; i < n_; ++i) f_[i] = s.total_field(free_[i]);
    for (std::size_t e = 0; e < g.lattice_edge_count(); ++e) {
      const auto& ed = g.edges()[e];
      double J = s.coupling(e);
      if (J == 0.0) continue;
      int a = free_index_[ed.u], b = free_index_[ed.v];
      if (a >= 0 && b >= 0) {
        nb[a].push_back({b, J});
        nb[b].push_back({a, J});
      } else if (a >= 0) {
        f_[a] += J;
      } else if (b >= 0) {
        f_[b] += J;
      }
    }
    off_.assign(n_ + 1, 0);
    for (std::size_t i = 0; i < n_; ++i) off_[i + 1] = off_[i] + nb[i].size();
    for (auto& l : nb)
      for (auto& p : l) {
        nbr_.push_back(p.first);
        cpl_.push_back(p.second);
      }
  }

  std::size_t free_count() const { return n_; }
  const std::vector<std::uint32_t>& free_vertices() const { return free_; }
  int free_index(std::uint32_t v) const { return v < nv_ ? free_index_[v] : -1; }

  // Bit mask of free spins in A; ghost and pinned vertices contribute +1 and are dropped.
  std::uint64_t mask(const std::vector<std::uint32_t>& A) const {
    std::uint64_t m = 0;
    for (auto v : A) {
      if (v == ghost_ && v >= nv_) continue;
      if (v >= nv_) throw ValidationError("spin set contains a vertex outside the graph");
      int i = free_index_[v];
      if (i >= 0) m ^= (std::uint64_t{1} << i);
    }
    return m;
  }

  // f(bits, weight) with weight = exp(H(σ) - H(all plus)).
  template <class F>
  void for_each(F&& f) const {
    std::vector<double> lf(n_);
    std::vector<int> sg(n_, 1);
    for (std::size_t i = 0; i < n_; ++i) {
      double acc = f_[i];
      for (std::size_t k = off_[i]; k < off_[i + 1]; ++k) acc += cpl_[k];
      lf[i] = acc;
    }
    double logw = 0.0;
    std::uint64_t bits = 0;
    f(bits, 1.0);
    const std::uint64_t total = std::uint64_t{1} << n_;
    for (std::uint64_t k = 1; k < total; ++k) {
      int i = __builtin_ctzll(k);
      logw += -2.0 * sg[i] * lf[i];
      double delta = -2.0 * sg[i];
      for (std::size_t q = off_[i]; q < off_[i + 1]; ++q) lf[nbr_[q]] += cpl_[q] * delta;
      sg[i] = -sg[i];
      bits ^= (std::uint64_t{1} << i);
      f(bits, std::exp(logw));
    }
  }

 private:
  std::size_t nv_;
  std::uint32_t ghost_;
  std::size_t n_ = 0;
  std::vector<int> free_index_;
  std::vector<std::uint32_t> free_;
  std::vector<double> f_;
  std::vector<std::size_t> off_;
  std::vector<int> nbr_;
  std::vector<double> cpl_;
};

inline int parity_sign(std::uint64_t bits, std::uint64_t mask) {
  return (__builtin_popcountll(bits & mask) & 1) ? -1 : 1;
}

// ⟨σ_A⟩ for several sets in one enumeration pass.
inline std::vector<double> spin_expectations(const LatticeGraph& g, const CouplingSpec& s,
                                             const std::vector<std::vector<std::uint32_t>>& sets,
                                             std::size_t budget = default_spin_budget) {
  IsingEnumerator en(g, s, budget);
  std::vector<std::uint64_t> masks;
  for (const auto& A : sets) masks.push_back(en.mask(A));
  std::vector<double> acc(sets.size(), 0.0);
  double Z = 0.0;
  en.for_each([&](std::uint64_t bits, double w) {
    Z += w;
    for (std::size_t k = 0; k < masks.size(); ++k) acc[k] += w * parity_sign(bits, masks[k]);
  });
  for (auto& a : acc) a /= Z;
  return acc;
}

inline double spin_expectation(const LatticeGraph& g, const CouplingSpec& s, const std::vector<std::uint32_t>& A,
                               std::size_t budget = default_spin_budget) {
  if (A.empty()) return 1.0;
  return spin_expectations(g, s, {A}, budget)[0];
}

// Normalized spin law; any number of correlations afterwards.
class IsingTable {
 public:
  IsingTable(const LatticeGraph& g, const CouplingSpec& s, std::size_t budget = default_spin_budget)
      : en_(g, s, budget) {
    prob_.assign(std::size_t{1} << en_.free_count(), 0.0);
    double Z = 0.0;
    en_.for_each([&](std::uint64_t bits, double w) {
      prob_[bits] = w;
      Z += w;
    });
    for (auto& p : prob_) p /= Z;
  }

  double expect(const std::vector<std::uint32_t>& A) const {
    std::uint64_t m = en_.mask(A);
    if (m == 0) return 1.0;
    double acc = 0.0;
    for (std::size_t b = 0; b < prob_.size(); ++b) acc += parity_sign(b, m) * prob_[b];
    return acc;
  }
  double one(std::uint32_t x) const { return expect({x}); }
  double two(std::uint32_t x, std::uint32_t y) const { return x == y ? 1.0 : expect({x, y}); }
  // ⟨σ_A;σ_B⟩
  double truncated(const std::vector<std::uint32_t>& A, const std::vector<std::uint32_t>& B) const {
    auto AB = A;
    AB.insert(AB.end(), B.begin(), B.end());
    return expect(AB) - expect(A) * expect(B);
  }
  const std::vector<double>& probabilities() const { return prob_; }
  const IsingEnumerator& enumerator() const { return en_; }

 private:
  IsingEnumerator en_;
  std::vector<double> prob_;
};

}  // namespace critical_arm
