#pragma once

// Genus-g colored hypergraph over the layers of a graded structure, its
// incidence graph, k-WL refinement (k = 1, 2), characteristic-subgroup
// extraction and the refinement pipeline.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "gpiso/bimaps.hpp"
#include "gpiso/error.hpp"
#include "gpiso/filters.hpp"
#include "gpiso/groups.hpp"

namespace gpiso {

using Descriptor = std::vector<std::uint64_t>;

namespace tag {
inline constexpr std::uint64_t kVertex = 1;
inline constexpr std::uint64_t kEdge = 2;
inline constexpr std::uint64_t kRefine = 3;
inline constexpr std::uint64_t kIndividual = 4;
inline constexpr std::uint64_t kPair = 5;
inline constexpr std::uint64_t kPairRefine = 6;
inline constexpr std::uint64_t kLeft = 7;
inline constexpr std::uint64_t kRight = 8;
// bimap label kinds
inline constexpr std::uint64_t kRankLabel = 20;
inline constexpr std::uint64_t kTypeLabel = 21;
inline constexpr std::uint64_t kSignatureLabel = 22;
// label-set sections
inline constexpr std::uint64_t kProjection = 30;
inline constexpr std::uint64_t kRestriction = 31;
inline constexpr std::uint64_t kWholeBracket = 32;
}  // namespace tag

enum class EdgeKind : std::uint64_t { Codim = 1, Dim = 2, DimCodim = 3, Whole = 4, Commute = 5, Triple = 6 };

// Interns descriptors to dense ids in first-seen order, and keeps the
// representatives used to label bimaps by pairwise comparison.
class ColorContext {
 public:
  std::uint32_t intern(const Descriptor& d) {
    auto it = ids_.find(d);
    if (it != ids_.end()) return it->second;
    std::uint32_t id = static_cast<std::uint32_t>(log_.size());
    ids_.emplace(d, id);
    log_.push_back(d);
    return id;
  }
  std::size_t size() const { return log_.size(); }
  const std::vector<Descriptor>& log() const { return log_; }

  // Label of a bimap up to isotopism (pseudo = false) or pseudo-isometry.
  std::pair<std::uint64_t, std::uint64_t> bimap_label(const MatrixTuple& t, bool pseudo) {
    if (t.n == 1 || t.n2 == 1) {
      // one side is a line: only the dimension of the span of the slices matters
      return {tag::kRankLabel, tuple_span(t).dim()};
    }
    if (t.m() == 1 && (!pseudo || t.alternating)) return {tag::kRankLabel, rank(t.mats[0])};
    auto sig = isotopism_signature(t);
    sig.push_back(pseudo ? 1 : 0);
    sig.push_back(t.m());
    auto& reps = registry_[sig];
    try {
      for (const auto& [rep, id] : reps) {
        bool same = pseudo ? pseudo_isometric(rep, t) : isotopism_bruteforce(rep, t).has_value();
        if (same) return {tag::kTypeLabel, id};
      }
      std::uint64_t id = next_label_++;
      reps.emplace_back(t, id);
      return {tag::kTypeLabel, id};
    } catch (const CapExceeded&) {
      Descriptor d{tag::kSignatureLabel};
      d.insert(d.end(), sig.begin(), sig.end());
      return {tag::kSignatureLabel, intern(d)};
    }
  }

 private:
  std::map<Descriptor, std::uint32_t> ids_;
  std::vector<Descriptor> log_;
  std::map<std::vector<std::uint64_t>, std::vector<std::pair<MatrixTuple, std::uint64_t>>> registry_;
  std::uint64_t next_label_ = 0;
};

struct HVertex {
  std::size_t layer = 0;
  Vec point;
};

struct HEdge {
  EdgeKind kind = EdgeKind::Codim;
  std::size_t layer = 0;              // owning layer (first layer for cross edges)
  std::optional<Subspace> subspace;   // within-layer edges
  std::vector<std::size_t> members;   // vertex indices, sorted
};

struct ColoredHypergraph {
  GradedStructure gs;
  std::size_t genus = 1;
  std::vector<HVertex> vertices;
  std::vector<std::vector<std::size_t>> layer_vertices;  // per layer, canonical order
  std::vector<std::map<Vec, std::size_t>> point_index;
  std::vector<HEdge> edges;
  std::vector<std::uint32_t> vertex_color, edge_color;

  std::size_t vertex_of(std::size_t layer, Vec v) const {
    normalize_projective(v, gs.layers[layer].p);
    return point_index[layer].at(v);
  }
};

inline constexpr std::size_t kHypergraphCap = 400'000;

namespace detail {

inline void append_label(Descriptor& d, std::pair<std::uint64_t, std::uint64_t> l) {
  d.push_back(l.first);
  d.push_back(l.second);
}

inline void append_label_of(Descriptor& d, const Label& l) {
  d.push_back(l.size());
  d.insert(d.end(), l.begin(), l.end());
}

// Project a bracket L_t x L_u -> L_s along functionals (rows of f).
inline MatrixTuple project(const MatrixTuple& b, const Matrix& f) {
  std::vector<Matrix> out;
  for (std::size_t r = 0; r < f.rows(); ++r) {
    Matrix h(b.n, b.n2, b.q);
    for (std::size_t k = 0; k < b.m(); ++k) h.add_scaled(b.mats[k], f(r, k));
    out.push_back(std::move(h));
  }
  return tuple_of(std::move(out), b.n, b.n2, b.q);
}

// Restrict the left argument of a bracket to the row space of x.
inline MatrixTuple restrict_left(const MatrixTuple& b, const Matrix& x) {
  std::vector<Matrix> out;
  for (const auto& m : b.mats) out.push_back(x * m);
  return tuple_of(std::move(out), x.rows(), b.n2, b.q);
}

inline Vec bracket_vector(const MatrixTuple& b, const Vec& x, const Vec& y) {
  Vec r(b.m());
  for (std::size_t k = 0; k < b.m(); ++k) {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < b.n; ++i) {
      if (x[i] == 0) continue;
      std::uint64_t inner = 0;
      for (std::size_t j = 0; j < b.n2; ++j) inner += static_cast<std::uint64_t>(b.mats[k](i, j)) * y[j];
      s += (inner % b.q) * x[i];
    }
    r[k] = static_cast<std::uint32_t>(s % b.q);
  }
  return r;
}

}  // namespace detail

// Builds H^(g) with its initial coloring. Labels for (t,u) pairs are sorted
// by the layer order of t then u.
inline ColoredHypergraph build_hypergraph(const GradedStructure& gs, std::size_t g, ColorContext& ctx,
                                          std::size_t cap = kHypergraphCap) {
  if (g < 1) throw InputError("genus parameter must be at least 1");
  ColoredHypergraph h;
  h.gs = gs;
  h.genus = g;
  const std::size_t nl = gs.layers.size();
  h.layer_vertices.resize(nl);
  h.point_index.resize(nl);
  std::size_t budget = 0;
  for (std::size_t s = 0; s < nl; ++s) {
    const auto& L = gs.layers[s];
    auto pts = projective_points(L.dim, L.p, cap);
    budget += pts.size();
    if (budget > cap) throw CapExceeded("hypergraph vertex count exceeds cap");
    for (auto& v : pts) {
      h.point_index[s].emplace(v, h.vertices.size());
      h.layer_vertices[s].push_back(h.vertices.size());
      h.vertices.push_back({s, v});
      Descriptor d{tag::kVertex};
      detail::append_label_of(d, L.label);
      h.vertex_color.push_back(ctx.intern(d));
    }
  }
  auto members_of = [&](std::size_t s, const Subspace& x) {
    std::vector<std::size_t> m;
    for (const auto& v : x.points()) m.push_back(h.point_index[s].at(v));
    std::sort(m.begin(), m.end());
    return m;
  };
  auto add_edge = [&](HEdge e, const Descriptor& d) {
    if (h.edges.size() + h.vertices.size() >= cap) throw CapExceeded("hypergraph edge count exceeds cap");
    h.edges.push_back(std::move(e));
    h.edge_color.push_back(ctx.intern(d));
  };

  for (std::size_t s = 0; s < nl; ++s) {
    const auto& L = gs.layers[s];
    const bool odd = L.p != 2;
    // (t,u) with t+u = s
    std::vector<const GradedBracket*> into;
    for (const auto& b : gs.brackets)
      if (b.target == s) into.push_back(&b);
    std::sort(into.begin(), into.end(), [](auto* a, auto* b) { return std::tie(a->s, a->t) < std::tie(b->s, b->t); });
    // brackets out of s: L_s x L_t -> L_{s+t}
    std::vector<const GradedBracket*> out;
    for (const auto& b : gs.brackets)
      if (b.s == s) out.push_back(&b);
    std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->t < b->t; });

    auto projection_labels = [&](Descriptor& d, const Matrix& functionals) {
      d.push_back(tag::kProjection);
      for (const auto* b : into) {
        detail::append_label_of(d, gs.layers[b->s].label);
        detail::append_label_of(d, gs.layers[b->t].label);
        bool pseudo = b->s == b->t && odd;
        detail::append_label(d, ctx.bimap_label(detail::project(b->map, functionals), pseudo));
      }
    };
    auto restriction_labels = [&](Descriptor& d, const Matrix& x, bool include_self) {
      d.push_back(tag::kRestriction);
      for (const auto* b : out) {
        if (b->t == s && !include_self) continue;
        detail::append_label_of(d, gs.layers[b->t].label);
        bool pseudo = b->t == s && odd;
        detail::append_label(d, ctx.bimap_label(detail::restrict_left(b->map, x), pseudo));
      }
    };

    if (L.dim <= g) {
      Subspace whole = Subspace::whole(L.dim, L.p);
      Descriptor d{tag::kEdge, static_cast<std::uint64_t>(EdgeKind::Whole)};
      detail::append_label_of(d, L.label);
      d.push_back(tag::kWholeBracket);
      for (const auto* b : into) {
        detail::append_label_of(d, gs.layers[b->s].label);
        detail::append_label_of(d, gs.layers[b->t].label);
        detail::append_label(d, ctx.bimap_label(b->map, b->s == b->t && odd));
      }
      restriction_labels(d, Matrix::identity(L.dim, L.p), true);
      add_edge({EdgeKind::Whole, s, whole, members_of(s, whole)}, d);
      continue;
    }
    const std::size_t codim_dim = L.dim - g;
    if (codim_dim == g) {
      for (auto& x : enumerate_subspaces(L.dim, L.p, g, cap)) {
        Descriptor d{tag::kEdge, static_cast<std::uint64_t>(EdgeKind::DimCodim)};
        detail::append_label_of(d, L.label);
        projection_labels(d, x.perp().basis());
        restriction_labels(d, x.basis(), false);
        auto m = members_of(s, x);
        add_edge({EdgeKind::DimCodim, s, std::move(x), std::move(m)}, d);
      }
      continue;
    }
    for (auto& x : enumerate_subspaces(L.dim, L.p, codim_dim, cap)) {
      Descriptor d{tag::kEdge, static_cast<std::uint64_t>(EdgeKind::Codim)};
      detail::append_label_of(d, L.label);
      projection_labels(d, x.perp().basis());
      auto m = members_of(s, x);
      add_edge({EdgeKind::Codim, s, std::move(x), std::move(m)}, d);
    }
    for (auto& x : enumerate_subspaces(L.dim, L.p, g, cap)) {
      Descriptor d{tag::kEdge, static_cast<std::uint64_t>(EdgeKind::Dim)};
      detail::append_label_of(d, L.label);
      restriction_labels(d, x.basis(), false);
      auto m = members_of(s, x);
      add_edge({EdgeKind::Dim, s, std::move(x), std::move(m)}, d);
    }
  }

  // cross-layer edges for s != t (each unordered pair once)
  for (const auto& b : gs.brackets) {
    if (b.s >= b.t) continue;
    const auto& ls = gs.layers[b.s];
    const auto& lt = gs.layers[b.t];
    for (auto xi : h.layer_vertices[b.s])
      for (auto yi : h.layer_vertices[b.t]) {
        Vec c = detail::bracket_vector(b.map, h.vertices[xi].point, h.vertices[yi].point);
        bool zero = std::all_of(c.begin(), c.end(), [](std::uint32_t v) { return v == 0; });
        Descriptor d{tag::kEdge};
        HEdge e;
        e.layer = b.s;
        if (zero) {
          d.push_back(static_cast<std::uint64_t>(EdgeKind::Commute));
          e.kind = EdgeKind::Commute;
          e.members = {xi, yi};
        } else {
          d.push_back(static_cast<std::uint64_t>(EdgeKind::Triple));
          e.kind = EdgeKind::Triple;
          e.members = {xi, yi, h.vertex_of(b.target, c)};
        }
        detail::append_label_of(d, ls.label);
        detail::append_label_of(d, lt.label);
        std::sort(e.members.begin(), e.members.end());
        add_edge(std::move(e), d);
      }
  }
  return h;
}

// ---------------------------------------------------------------- incidence graph

// Left nodes are hypergraph vertices, right nodes are hyperedges.
struct IncidenceGraph {
  std::size_t left = 0, right = 0;
  std::vector<std::vector<std::size_t>> adj;  // node -> neighbors (right nodes offset by `left`)
  std::vector<std::uint32_t> color;           // node colors, sides disjoint

  std::size_t size() const { return left + right; }
};

inline IncidenceGraph incidence_graph(const ColoredHypergraph& h, ColorContext& ctx) {
  IncidenceGraph ig;
  ig.left = h.vertices.size();
  ig.right = h.edges.size();
  ig.adj.resize(ig.size());
  for (std::size_t e = 0; e < h.edges.size(); ++e)
    for (auto v : h.edges[e].members) {
      ig.adj[v].push_back(ig.left + e);
      ig.adj[ig.left + e].push_back(v);
    }
  for (auto& a : ig.adj) std::sort(a.begin(), a.end());
  for (auto c : h.vertex_color) ig.color.push_back(ctx.intern({tag::kLeft, c}));
  for (auto c : h.edge_color) ig.color.push_back(ctx.intern({tag::kRight, c}));
  return ig;
}

// Membership lists recovered from the incidence graph.
inline std::vector<std::vector<std::size_t>> hyperedges_of(const IncidenceGraph& ig) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t e = 0; e < ig.right; ++e) out.push_back(ig.adj[ig.left + e]);
  return out;
}

// ---------------------------------------------------------------- WL

struct StableColoring {
  std::vector<std::uint32_t> vertex_colors;   // left side
  std::vector<std::uint32_t> edge_colors;     // right side
  std::size_t rounds = 0;                     // refinement rounds that changed the partition
  std::vector<std::vector<std::uint32_t>> trace;  // node colors per round, round 0 = input
};

inline std::size_t class_count(const std::vector<std::uint32_t>& c) {
  std::vector<std::uint32_t> s = c;
  std::sort(s.begin(), s.end());
  return static_cast<std::size_t>(std::unique(s.begin(), s.end()) - s.begin());
}

// Same partition of positions.
inline bool same_partition(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  if (a.size() != b.size()) return false;
  std::map<std::uint32_t, std::uint32_t> f, g;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [it, ins] = f.emplace(a[i], b[i]);
    if (!ins && it->second != b[i]) return false;
    auto [jt, jns] = g.emplace(b[i], a[i]);
    if (!jns && jt->second != a[i]) return false;
  }
  return true;
}

// Every class of fine lies inside a class of coarse.
inline bool refines(const std::vector<std::uint32_t>& fine, const std::vector<std::uint32_t>& coarse) {
  std::map<std::uint32_t, std::uint32_t> f;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    auto [it, ins] = f.emplace(fine[i], coarse[i]);
    if (!ins && it->second != coarse[i]) return false;
  }
  return true;
}

namespace detail {

inline void append_multiset(Descriptor& d, std::vector<std::uint32_t>& xs) {
  std::sort(xs.begin(), xs.end());
  d.push_back(xs.size());
  for (std::size_t i = 0; i < xs.size();) {
    std::size_t j = i;
    while (j < xs.size() && xs[j] == xs[i]) ++j;
    d.push_back(xs[i]);
    d.push_back(j - i);
    i = j;
  }
}

// One bulk-synchronous color refinement round.
inline std::vector<std::uint32_t> refine_round(const IncidenceGraph& g, const std::vector<std::uint32_t>& c,
                                               ColorContext& ctx) {
  std::vector<Descriptor> ds(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) {
    Descriptor& d = ds[v];
    d = {tag::kRefine, c[v]};
    std::vector<std::uint32_t> nb;
    for (auto w : g.adj[v]) nb.push_back(c[w]);
    append_multiset(d, nb);
  }
  std::vector<std::uint32_t> out(g.size());
  for (std::size_t v = 0; v < g.size(); ++v) out[v] = ctx.intern(ds[v]);
  return out;
}

inline StableColoring one_wl(const IncidenceGraph& g, ColorContext& ctx, std::vector<std::uint32_t> c) {
  StableColoring sc;
  sc.trace.push_back(c);
  while (true) {
    auto next = refine_round(g, c, ctx);
    if (same_partition(next, c)) break;
    c = std::move(next);
    sc.trace.push_back(c);
    ++sc.rounds;
  }
  sc.vertex_colors.assign(c.begin(), c.begin() + g.left);
  sc.edge_colors.assign(c.begin() + g.left, c.end());
  return sc;
}

}  // namespace detail

inline constexpr std::size_t kTwoWLCap = 1000;

inline StableColoring wl_refine_from(const IncidenceGraph& g, std::size_t k, ColorContext& ctx,
                                     const std::vector<std::uint32_t>& start) {
  if (k == 1) return detail::one_wl(g, ctx, start);
  if (k != 2) throw InputError("only k in {1,2} is supported");
  // seed from the stable 1-WL coloring so that 2-WL refines it
  StableColoring base = detail::one_wl(g, ctx, start);
  std::vector<std::uint32_t> c1 = base.trace.back();
  const std::size_t n = g.size();
  if (n > kTwoWLCap) throw CapExceeded("2-WL on " + std::to_string(n) + " nodes exceeds cap");
  std::vector<char> adjm(n * n, 0);
  for (std::size_t v = 0; v < n; ++v)
    for (auto w : g.adj[v]) adjm[v * n + w] = 1;
  std::vector<std::uint32_t> pc(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      pc[a * n + b] = ctx.intern({tag::kPair, c1[a], c1[b], a == b ? 1u : 0u, adjm[a * n + b] ? 1u : 0u});
  StableColoring sc = base;
  std::vector<std::uint32_t> col(n), row(n);
  while (true) {
    std::vector<Descriptor> ds(n * n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t w = 0; w < n; ++w) {
          col[w] = pc[w * n + b];
          row[w] = pc[a * n + w];
        }
        Descriptor& d = ds[a * n + b];
        d = {tag::kPairRefine, pc[a * n + b]};
        detail::append_multiset(d, col);
        detail::append_multiset(d, row);
      }
    std::vector<std::uint32_t> next(n * n);
    for (std::size_t i = 0; i < n * n; ++i) next[i] = ctx.intern(ds[i]);
    if (same_partition(next, pc)) break;
    pc = std::move(next);
    ++sc.rounds;
    std::vector<std::uint32_t> diag(n);
    for (std::size_t v = 0; v < n; ++v) diag[v] = pc[v * n + v];
    sc.trace.push_back(diag);
  }
  std::vector<std::uint32_t> diag(n);
  for (std::size_t v = 0; v < n; ++v) diag[v] = pc[v * n + v];
  sc.vertex_colors.assign(diag.begin(), diag.begin() + g.left);
  sc.edge_colors.assign(diag.begin() + g.left, diag.end());
  return sc;
}

inline StableColoring wl_refine(const IncidenceGraph& g, std::size_t k, ColorContext& ctx) {
  return wl_refine_from(g, k, ctx, g.color);
}

inline std::vector<std::uint32_t> node_colors(const StableColoring& sc) {
  std::vector<std::uint32_t> c = sc.vertex_colors;
  c.insert(c.end(), sc.edge_colors.begin(), sc.edge_colors.end());
  return c;
}

// Class sizes of vertex colors in one layer, sorted descending.
inline std::vector<std::size_t> layer_class_sizes(const ColoredHypergraph& h, const StableColoring& sc, std::size_t layer) {
  std::map<std::uint32_t, std::size_t> cnt;
  for (auto v : h.layer_vertices[layer]) ++cnt[sc.vertex_colors[v]];
  std::vector<std::size_t> out;
  for (auto& [c, n] : cnt) out.push_back(n);
  std::sort(out.rbegin(), out.rend());
  return out;
}

// ---------------------------------------------------------------- dump

inline std::string point_string(const Vec& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ":" : "") + std::to_string(v[i]);
  return s + ")";
}

// LAYER s | POINT (v1:...:vm) | COLOR id | ROUND r, plus DUAL lines for the
// normal vectors of codimension-1 edges (genus 1).
inline std::string dump_coloring(const ColoredHypergraph& h, const StableColoring& sc) {
  // key: round, layer, POINT before DUAL, coordinates
  std::vector<std::pair<std::tuple<std::size_t, std::size_t, int, Vec>, std::string>> lines;
  const std::size_t nv = h.vertices.size();
  for (std::size_t r = 0; r < sc.trace.size(); ++r) {
    const auto& c = sc.trace[r];
    for (std::size_t v = 0; v < nv; ++v) {
      const auto& hv = h.vertices[v];
      lines.push_back({{r, hv.layer, 0, hv.point},
                       "LAYER " + label_string(h.gs.layers[hv.layer].label) + " | POINT " + point_string(hv.point) +
                           " | COLOR " + std::to_string(c[v]) + " | ROUND " + std::to_string(r)});
    }
    for (std::size_t e = 0; e < h.edges.size(); ++e) {
      const auto& he = h.edges[e];
      if (!he.subspace || (he.kind != EdgeKind::Codim && he.kind != EdgeKind::DimCodim)) continue;
      Subspace perp = he.subspace->perp();
      if (perp.dim() != 1) continue;
      Vec nvec = perp.basis().row(0);
      lines.push_back({{r, he.layer, 1, nvec},
                       "LAYER " + label_string(h.gs.layers[he.layer].label) + " | DUAL " + point_string(nvec) +
                           " | COLOR " + std::to_string(c[nv + e]) + " | ROUND " + std::to_string(r)});
    }
  }
  std::sort(lines.begin(), lines.end());
  std::ostringstream os;
  for (const auto& l : lines) os << l.second << '\n';
  return os.str();
}

// ---------------------------------------------------------------- extraction

// Lifts of spans of vertex color classes strictly between layer bottom and top.
inline std::vector<Subgroup> extract_characteristic_subgroups(const ColoredHypergraph& h, const StableColoring& sc,
                                                              const Filter& f) {
  std::vector<Subgroup> out;
  const Group& g = f.group();
  for (std::size_t s = 0; s < h.gs.layers.size(); ++s) {
    const Layer* layer = f.layer_at(h.gs.layers[s].label);
    if (!layer) continue;
    std::map<std::uint32_t, std::vector<Vec>> classes;
    for (auto v : h.layer_vertices[s]) classes[sc.vertex_colors[v]].push_back(h.vertices[v].point);
    for (auto& [c, pts] : classes) {
      Subspace x = Subspace::span_of(pts, layer->dim, layer->p);
      if (x.dim() == 0 || x.dim() == layer->dim) continue;
      Subgroup lift;
      for (auto e : layer->space.top)
        if (x.contains(layer->space.vector_of(e))) lift.push_back(e);
      std::sort(lift.begin(), lift.end());
      bool known = std::find(out.begin(), out.end(), lift) != out.end();
      for (const auto& t : f.terms()) known = known || t.subgroup == lift;
      if (!known) out.push_back(std::move(lift));
    }
  }
  (void)g;
  return out;
}

// ---------------------------------------------------------------- pipeline

struct PipelineResult {
  Filter filter;
  ColoredHypergraph hypergraph;
  IncidenceGraph incidence;
  StableColoring coloring;
  std::size_t iterations = 0;
  std::size_t refinements = 0;
  bool axioms_held = true;           // after every constructor and refinement
  std::vector<std::size_t> image_sizes;  // per iteration
};

// Refine phi by (X cap T_i) T_{i+1} for every term, keeping only new subgroups.
inline Filter refine_by_subgroup(Filter f, const Subgroup& x, std::size_t* count, bool* axioms) {
  const Group& g = f.group();
  bool changed = true;
  while (changed) {
    changed = false;
    const auto terms = f.terms();
    for (std::size_t i = 0; i + 1 < terms.size(); ++i) {
      Subgroup h = product(g, intersect(x, terms[i].subgroup), terms[i + 1].subgroup);
      if (h == terms[i].subgroup || h == terms[i + 1].subgroup) continue;
      f = refine_with(f, h);
      ++*count;
      *axioms = *axioms && verify_filter_axioms(f);
      changed = true;
      break;
    }
  }
  return f;
}

// The refinement loop: build, refine colors, extract, refine the filter, until
// the filter stops changing (at most log2|G| refinements can happen).
inline PipelineResult run_pipeline(std::shared_ptr<const Group> gp, std::size_t g, std::size_t k, ColorContext& ctx,
                                   bool use_socle = true) {
  PipelineResult r;
  r.filter = initial_filter(gp);
  r.axioms_held = verify_filter_axioms(r.filter);
  if (use_socle && is_nilpotent(*gp)) r.filter = refine_by_subgroup(r.filter, socle_nilpotent(*gp), &r.refinements, &r.axioms_held);
  std::size_t log2n = 0;
  while ((std::size_t{1} << log2n) < gp->order()) ++log2n;
  for (std::size_t iter = 0; iter <= log2n + 1; ++iter) {
    ++r.iterations;
    r.image_sizes.push_back(r.filter.terms().size());
    GradedStructure gs = graded_structure(r.filter);
    r.hypergraph = build_hypergraph(gs, g, ctx);
    r.incidence = incidence_graph(r.hypergraph, ctx);
    r.coloring = wl_refine(r.incidence, k, ctx);
    auto subs = extract_characteristic_subgroups(r.hypergraph, r.coloring, r.filter);
    bool changed = false;
    for (const auto& x : subs) {
      std::size_t before = r.filter.terms().size();
      r.filter = refine_by_subgroup(r.filter, x, &r.refinements, &r.axioms_held);
      changed = changed || r.filter.terms().size() != before;
    }
    if (!changed) break;
  }
  return r;
}

inline PipelineResult run_pipeline(const Group& g, std::size_t genus, std::size_t k, ColorContext& ctx) {
  return run_pipeline(std::make_shared<const Group>(g), genus, k, ctx);
}

// Multiset of (layer label, p, dim, color, class size) over vertex classes
// and (color, size) over edge classes.
using PipelineSignature = std::vector<std::vector<std::uint64_t>>;

inline PipelineSignature pipeline_signature(const PipelineResult& r) {
  PipelineSignature sig;
  const auto& h = r.hypergraph;
  for (std::size_t s = 0; s < h.gs.layers.size(); ++s) {
    std::map<std::uint32_t, std::size_t> cnt;
    for (auto v : h.layer_vertices[s]) ++cnt[r.coloring.vertex_colors[v]];
    for (auto& [c, n] : cnt) {
      std::vector<std::uint64_t> e{0, h.gs.layers[s].p, h.gs.layers[s].dim, c, n};
      e.insert(e.end(), h.gs.layers[s].label.begin(), h.gs.layers[s].label.end());
      sig.push_back(std::move(e));
    }
  }
  std::map<std::uint32_t, std::size_t> ecnt;
  for (auto c : r.coloring.edge_colors) ++ecnt[c];
  for (auto& [c, n] : ecnt) sig.push_back({1, c, n});
  std::sort(sig.begin(), sig.end());
  return sig;
}

struct JointResult {
  PipelineResult first, second;
  PipelineSignature sig_first, sig_second;
  bool signatures_match() const { return sig_first == sig_second; }
};

inline JointResult joint_pipeline(const Group& a, const Group& b, std::size_t g, std::size_t k, ColorContext& ctx) {
  JointResult j;
  j.first = run_pipeline(a, g, k, ctx);
  j.second = run_pipeline(b, g, k, ctx);
  j.sig_first = pipeline_signature(j.first);
  j.sig_second = pipeline_signature(j.second);
  return j;
}

}  // namespace gpiso
