#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace critical_arm {

struct Edge {
  std::uint32_t u;
  std::uint32_t v;
  friend bool operator==(const Edge&, const Edge&) = default;
};

inline constexpr std::size_t default_vertex_budget = 50'000'000;

// Finite subgraph of Z^d (box, torus or general embedded), or an abstract graph (dim 0).
// Lattice edges come first; when the ghost is present, ghost edge of x has id
// lattice_edge_count() + x and the ghost is vertex lattice_vertex_count().
class LatticeGraph {
 public:
  enum class Kind : std::uint8_t { box, torus, general, abstract };
  static constexpr std::uint32_t npos = std::numeric_limits<std::uint32_t>::max();

  static LatticeGraph rect(std::vector<int> sides, std::vector<int> offsets, bool ghost,
                           std::size_t budget = default_vertex_budget) {
    LatticeGraph g;
    g.kind_ = Kind::box;
    g.init_grid(std::move(sides), std::move(offsets), budget);
    g.build_grid_edges(false);
    g.finish(ghost);
    return g;
  }

  static LatticeGraph box(int d, int n, bool ghost, std::size_t budget = default_vertex_budget) {
    if (d < 1 || n < 0) throw ValidationError("build_box: need d >= 1 and n >= 0");
    return rect(std::vector<int>(d, 2 * n + 1), std::vector<int>(d, n), ghost, budget);
  }

  static LatticeGraph torus(int d, int L, bool ghost, std::size_t budget = default_vertex_budget) {
    if (d < 1 || L < 3) throw ValidationError("torus: need d >= 1 and L >= 3");
    LatticeGraph g;
    g.kind_ = Kind::torus;
    g.init_grid(std::vector<int>(d, L), std::vector<int>(d, L / 2), budget);
    g.build_grid_edges(true);
    g.finish(ghost);
    return g;
  }

  // Embedded graph from explicit coordinates and lattice edges.
  static LatticeGraph embedded(int d, std::vector<int> coords, std::vector<Edge> edges, bool ghost) {
    LatticeGraph g;
    g.kind_ = Kind::general;
    g.d_ = d;
    g.nv_ = coords.size() / static_cast<std::size_t>(d);
    g.coord_store_ = std::move(coords);
    for (std::uint32_t v = 0; v < g.nv_; ++v) {
      std::vector<int> c(g.coord_store_.begin() + v * d, g.coord_store_.begin() + (v + 1) * d);
      if (!g.lookup_.emplace(std::move(c), v).second) throw ValidationError("embedded: duplicate vertex");
    }
    for (const auto& e : edges) {
      if (e.u >= g.nv_ || e.v >= g.nv_) throw ValidationError("embedded: edge endpoint out of range");
      int dist = 0, dir = -1;
      for (int i = 0; i < d; ++i) {
        int diff = g.coord_store_[e.v * d + i] - g.coord_store_[e.u * d + i];
        dist += std::abs(diff);
        if (diff != 0) dir = i;
      }
      if (dist != 1) throw ValidationError("embedded: edge is not a unit lattice step");
      g.edges_.push_back(e.u < e.v ? e : Edge{e.v, e.u});
      g.dir_.push_back(static_cast<std::uint8_t>(dir));
    }
    g.finish(ghost);
    return g;
  }

  static LatticeGraph abstract(std::size_t nv, std::vector<Edge> edges, bool ghost) {
    LatticeGraph g;
    g.kind_ = Kind::abstract;
    g.d_ = 0;
    g.nv_ = nv;
    for (const auto& e : edges) {
      if (e.u >= nv || e.v >= nv || e.u == e.v) throw ValidationError("abstract: bad edge");
      g.edges_.push_back(e.u < e.v ? e : Edge{e.v, e.u});
      g.dir_.push_back(0);
    }
    g.finish(ghost);
    return g;
  }

  Kind kind() const { return kind_; }
  int dim() const { return d_; }
  bool embedded_in_lattice() const { return kind_ == Kind::box || kind_ == Kind::general; }
  std::size_t lattice_vertex_count() const { return nv_; }
  std::size_t vertex_count() const { return nv_ + (ghost_ ? 1 : 0); }
  bool has_ghost() const { return ghost_; }
  std::uint32_t ghost() const { return static_cast<std::uint32_t>(nv_); }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }
  std::size_t lattice_edge_count() const { return nle_; }
  bool is_ghost_edge(std::size_t e) const { return e >= nle_; }
  std::uint32_t ghost_edge(std::uint32_t x) const { return static_cast<std::uint32_t>(nle_ + x); }
  int edge_direction(std::size_t e) const { return e >= nle_ ? d_ : dir_[e]; }
  const std::vector<int>& sides() const { return sides_; }
  const std::vector<int>& offsets() const { return offsets_; }
  const std::vector<std::size_t>& strides() const { return strides_; }

  std::span<const std::uint32_t> incident(std::uint32_t v) const {
    return {adj_.data() + adj_off_[v], adj_.data() + adj_off_[v + 1]};
  }
  std::size_t degree(std::uint32_t v) const { return adj_off_[v + 1] - adj_off_[v]; }
  std::uint32_t other(std::uint32_t e, std::uint32_t v) const {
    return edges_[e].u == v ? edges_[e].v : edges_[e].u;
  }

  bool is_boundary(std::uint32_t v) const { return v < nv_ && boundary_flag_[v] != 0; }
  const std::vector<std::uint32_t>& boundary() const { return boundary_; }

  void coords(std::uint32_t v, int* out) const {
    if (kind_ == Kind::box || kind_ == Kind::torus) {
      std::size_t r = v;
      for (int i = 0; i < d_; ++i) {
        out[i] = static_cast<int>(r / strides_[i]) - offsets_[i];
        r %= strides_[i];
      }
    } else {
      for (int i = 0; i < d_; ++i) out[i] = coord_store_[static_cast<std::size_t>(v) * d_ + i];
    }
  }
  std::vector<int> coords(std::uint32_t v) const {
    std::vector<int> c(d_);
    coords(v, c.data());
    return c;
  }

  std::uint32_t index_of(const int* c) const {
    if (kind_ == Kind::box || kind_ == Kind::torus) {
      std::size_t idx = 0;
      for (int i = 0; i < d_; ++i) {
        int s = c[i] + offsets_[i];
        if (s < 0 || s >= sides_[i]) return npos;
        idx += static_cast<std::size_t>(s) * strides_[i];
      }
      return static_cast<std::uint32_t>(idx);
    }
    if (kind_ == Kind::abstract) return npos;
    auto it = lookup_.find(std::vector<int>(c, c + d_));
    return it == lookup_.end() ? npos : it->second;
  }
  std::uint32_t index_of(const std::vector<int>& c) const { return index_of(c.data()); }

  // Vertex at coordinate 0 when present, else vertex 0.
  std::uint32_t origin() const {
    if (kind_ == Kind::abstract) return 0;
    std::vector<int> z(d_, 0);
    auto v = index_of(z);
    return v == npos ? 0 : v;
  }

  std::uint32_t edge_between(std::uint32_t a, std::uint32_t b) const {
    for (auto e : incident(a))
      if (other(e, a) == b) return e;
    return npos;
  }

  // Vertices with sup-norm distance exactly m from the origin (the inner boundary of Λ_m).
  std::vector<std::uint32_t> sphere(int m) const {
    std::vector<std::uint32_t> out;
    std::vector<int> c(d_);
    for (std::uint32_t v = 0; v < nv_; ++v) {
      coords(v, c.data());
      int r = 0;
      for (int x : c) r = std::max(r, std::abs(x));
      if (r == m) out.push_back(v);
    }
    return out;
  }

  std::string serialize() const {
    std::ostringstream os;
    os << "critical-arm-graph 1\n";
    os << static_cast<int>(kind_) << ' ' << d_ << ' ' << (ghost_ ? 1 : 0) << ' ' << nv_ << ' ' << nle_ << '\n';
    for (int s : sides_) os << s << ' ';
    os << '\n';
    for (int o : offsets_) os << o << ' ';
    os << '\n';
    if (kind_ == Kind::general) {
      for (int c : coord_store_) os << c << ' ';
      os << '\n';
    }
    for (std::size_t e = 0; e < nle_; ++e) os << edges_[e].u << ' ' << edges_[e].v << '\n';
    return os.str();
  }

  static LatticeGraph deserialize(const std::string& text) {
    std::istringstream is(text);
    std::string magic;
    int version = 0;
    is >> magic >> version;
    if (magic != "critical-arm-graph" || version != 1) throw ValidationError("graph: bad header");
    int kind = 0, d = 0, gh = 0;
    std::size_t nv = 0, ne = 0;
    is >> kind >> d >> gh >> nv >> ne;
    Kind k = static_cast<Kind>(kind);
    std::vector<int> sides, offsets;
    if (k == Kind::box || k == Kind::torus) {
      sides.resize(d);
      offsets.resize(d);
      for (auto& s : sides) is >> s;
      for (auto& o : offsets) is >> o;
    }
    std::vector<int> coords;
    if (k == Kind::general) {
      coords.resize(nv * d);
      for (auto& c : coords) is >> c;
    }
    std::vector<Edge> edges(ne);
    for (auto& e : edges) is >> e.u >> e.v;
    if (!is) throw ValidationError("graph: truncated input");
    LatticeGraph g;
    switch (k) {
      case Kind::box: g = rect(sides, offsets, gh != 0); break;
      case Kind::torus: g = torus(d, sides.at(0), gh != 0); break;
      case Kind::general: g = embedded(d, std::move(coords), edges, gh != 0); break;
      case Kind::abstract: g = abstract(nv, edges, gh != 0); break;
      default: throw ValidationError("graph: unknown kind");
    }
    if (g.nv_ != nv || !std::equal(edges.begin(), edges.end(), g.edges_.begin()) || g.nle_ != ne)
      throw ValidationError("graph: edge list does not match rebuilt graph");
    return g;
  }

 private:
  void init_grid(std::vector<int> sides, std::vector<int> offsets, std::size_t budget) {
    d_ = static_cast<int>(sides.size());
    if (d_ < 1 || offsets.size() != sides.size()) throw ValidationError("grid: bad shape");
    sides_ = std::move(sides);
    offsets_ = std::move(offsets);
    double total = 1;
    for (int s : sides_) {
      if (s < 1) throw ValidationError("grid: side must be positive");
      total *= s;
    }
    if (total > static_cast<double>(budget) || total > 4.0e9)
      throw CapacityError("lattice: vertex count exceeds budget");
    nv_ = static_cast<std::size_t>(total);
    strides_.assign(d_, 1);
    for (int i = d_ - 2; i >= 0; --i) strides_[i] = strides_[i + 1] * sides_[i + 1];
  }

  void build_grid_edges(bool periodic) {
    std::size_t count = 0;
    for (int i = 0; i < d_; ++i) {
      std::size_t per = nv_ / sides_[i];
      count += periodic ? nv_ : per * (sides_[i] - 1);
    }
    edges_.reserve(count);
    dir_.reserve(count);
    std::vector<int> c(d_, 0);
    for (std::size_t v = 0; v < nv_; ++v) {
      for (int i = 0; i < d_; ++i) {
        if (c[i] + 1 < sides_[i]) {
          edges_.push_back({static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(v + strides_[i])});
          dir_.push_back(static_cast<std::uint8_t>(i));
        } else if (periodic) {
          std::uint32_t w = static_cast<std::uint32_t>(v - c[i] * strides_[i]);
          edges_.push_back({w, static_cast<std::uint32_t>(v)});
          dir_.push_back(static_cast<std::uint8_t>(i));
        }
      }
      for (int i = d_ - 1; i >= 0; --i) {
        if (++c[i] < sides_[i]) break;
        c[i] = 0;
      }
    }
  }

  void finish(bool ghost) {
    ghost_ = ghost;
    nle_ = edges_.size();
    if (ghost_) {
      edges_.reserve(nle_ + nv_);
      for (std::size_t x = 0; x < nv_; ++x)
        edges_.push_back({static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(nv_)});
    }
    std::size_t nvt = vertex_count();
    adj_off_.assign(nvt + 1, 0);
    for (const auto& e : edges_) {
      ++adj_off_[e.u + 1];
      ++adj_off_[e.v + 1];
    }
    std::partial_sum(adj_off_.begin(), adj_off_.end(), adj_off_.begin());
    adj_.resize(2 * edges_.size());
    std::vector<std::size_t> fill(adj_off_.begin(), adj_off_.end() - 1);
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      adj_[fill[edges_[e].u]++] = static_cast<std::uint32_t>(e);
      adj_[fill[edges_[e].v]++] = static_cast<std::uint32_t>(e);
    }
    boundary_flag_.assign(nv_, 0);
    boundary_.clear();
    if (kind_ == Kind::box || kind_ == Kind::general) {
      std::vector<int> c(d_);
      for (std::uint32_t v = 0; v < nv_; ++v) {
        coords(v, c.data());
        bool b = false;
        for (int i = 0; i < d_ && !b; ++i) {
          for (int s : {-1, 1}) {
            c[i] += s;
            if (index_of(c.data()) == npos) b = true;
            c[i] -= s;
          }
        }
        if (b) {
          boundary_flag_[v] = 1;
          boundary_.push_back(v);
        }
      }
    }
  }

  Kind kind_ = Kind::box;
  int d_ = 0;
  std::size_t nv_ = 0;
  std::size_t nle_ = 0;
  bool ghost_ = false;
  std::vector<int> sides_, offsets_;
  std::vector<std::size_t> strides_;
  std::vector<int> coord_store_;
  std::map<std::vector<int>, std::uint32_t> lookup_;
  std::vector<Edge> edges_;
  std::vector<std::uint8_t> dir_;
  std::vector<std::size_t> adj_off_;
  std::vector<std::uint32_t> adj_;
  std::vector<std::uint8_t> boundary_flag_;
  std::vector<std::uint32_t> boundary_;
};

inline LatticeGraph build_box(int d, int n, bool ghost, std::size_t budget = default_vertex_budget) {
  return LatticeGraph::box(d, n, ghost, budget);
}

// Subgraph of an embedded parent spanned by `vertices`, keeping parent lattice edges
// among them (all of them, or only those listed in `edge_ids`).
inline LatticeGraph induced_subgraph(const LatticeGraph& parent, std::vector<std::uint32_t> vertices, bool ghost,
                                     const std::vector<std::uint32_t>* edge_ids = nullptr) {
  if (!parent.embedded_in_lattice()) throw ValidationError("induced_subgraph: parent must be embedded");
  std::sort(vertices.begin(), vertices.end());
  vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
  const int d = parent.dim();
  std::vector<std::uint32_t> local(parent.lattice_vertex_count(), LatticeGraph::npos);
  std::vector<int> coords;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    local[vertices[i]] = static_cast<std::uint32_t>(i);
    auto c = parent.coords(vertices[i]);
    coords.insert(coords.end(), c.begin(), c.end());
  }
  std::vector<Edge> edges;
  auto take = [&](std::size_t e) {
    const auto& ed = parent.edges()[e];
    if (local[ed.u] != LatticeGraph::npos && local[ed.v] != LatticeGraph::npos)
      edges.push_back({local[ed.u], local[ed.v]});
  };
  if (edge_ids) {
    auto ids = *edge_ids;
    std::sort(ids.begin(), ids.end());
    for (auto e : ids)
      if (!parent.is_ghost_edge(e)) take(e);
  } else {
    for (std::size_t e = 0; e < parent.lattice_edge_count(); ++e) take(e);
  }
  return LatticeGraph::embedded(d, std::move(coords), std::move(edges), ghost);
}

struct SubsetRegion {
  const LatticeGraph* parent = nullptr;
  std::vector<std::uint32_t> members;
  std::uint32_t root = 0;

  SubsetRegion() = default;
  SubsetRegion(const LatticeGraph& g, std::vector<std::uint32_t> s, std::uint32_t r) : parent(&g), members(std::move(s)), root(r) {
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    for (auto v : members)
      if (v >= g.lattice_vertex_count()) throw ValidationError("region: vertex outside parent");
    if (!contains(root)) throw ValidationError("region: root not in S");
  }

  bool contains(std::uint32_t v) const { return std::binary_search(members.begin(), members.end(), v); }
  std::size_t size() const { return members.size(); }
};

// Centered box Λ_j inside the parent, rooted at the origin.
inline SubsetRegion box_region(const LatticeGraph& g, int j) {
  std::vector<std::uint32_t> s;
  std::vector<int> c(g.dim());
  for (std::uint32_t v = 0; v < g.lattice_vertex_count(); ++v) {
    g.coords(v, c.data());
    int r = 0;
    for (int x : c) r = std::max(r, std::abs(x));
    if (r <= j) s.push_back(v);
  }
  return SubsetRegion(g, std::move(s), g.origin());
}

struct BoundaryPair {
  std::uint32_t u;
  std::uint32_t v;  // npos when v lies outside the parent graph
  bool exterior;
  int direction;
  int sign;
};

// Ordered pairs (u, v) with u in S, v not in S, u ~ v in Z^d.
inline std::vector<BoundaryPair> edge_boundary(const SubsetRegion& region) {
  if (region.members.empty()) throw ValidationError("edge_boundary: empty region");
  const LatticeGraph& g = *region.parent;
  std::vector<BoundaryPair> out;
  if (!g.embedded_in_lattice()) {
    for (auto u : region.members)
      for (auto e : g.incident(u)) {
        if (g.is_ghost_edge(e)) continue;
        auto v = g.other(e, u);
        if (!region.contains(v)) out.push_back({u, v, false, 0, 0});
      }
    return out;
  }
  const int d = g.dim();
  std::vector<int> c(d);
  for (auto u : region.members) {
    g.coords(u, c.data());
    for (int i = 0; i < d; ++i)
      for (int s : {1, -1}) {
        c[i] += s;
        auto v = g.index_of(c.data());
        c[i] -= s;
        if (v == LatticeGraph::npos)
          out.push_back({u, LatticeGraph::npos, true, i, s});
        else if (!region.contains(v))
          out.push_back({u, v, false, i, s});
      }
  }
  return out;
}

}  // namespace critical_arm
