#pragma once

// Isomorphism testing for nilpotent groups: composition series compatible
// with the filter and the color classes, exact series isomorphism by
// backtracking, an individualize-and-refine variant, and a brute-force oracle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "gpiso/error.hpp"
#include "gpiso/filters.hpp"
#include "gpiso/groups.hpp"
#include "gpiso/hypergraph.hpp"

namespace gpiso {

// Element map G -> H by index.
struct IsoWitness {
  std::vector<Elem> map;
};

inline bool verify_isomorphism(const Group& g, const Group& h, const std::vector<Elem>& map) {
  if (g.order() != h.order() || map.size() != g.order()) return false;
  std::vector<char> hit(h.order(), 0);
  for (auto y : map) {
    if (y >= h.order() || hit[y]) return false;
    hit[y] = 1;
  }
  for (Elem a = 0; a < g.order(); ++a)
    for (Elem b = 0; b < g.order(); ++b)
      if (map[g.mul(a, b)] != h.mul(map[a], map[b])) return false;
  return true;
}

// ---------------------------------------------------------------- oracle

inline constexpr std::size_t kOracleCap = 256;

// Backtracking over images of a fixed generating sequence; each choice is
// extended to the generated subgroup by closure.
inline std::optional<IsoWitness> brute_force_iso_oracle(const Group& g, const Group& h, std::size_t cap = kOracleCap) {
  if (g.order() > cap || h.order() > cap) throw CapExceeded("oracle limited to order <= " + std::to_string(cap));
  if (g.order() != h.order()) return std::nullopt;
  auto orders = [](const Group& x) {
    std::vector<std::uint64_t> o;
    for (Elem e = 0; e < x.order(); ++e) o.push_back(x.elem_order(e));
    std::sort(o.begin(), o.end());
    return o;
  };
  if (orders(g) != orders(h)) return std::nullopt;
  const auto gens = generators_of(g, g.whole());
  const std::size_t n = g.order();
  std::vector<Elem> map(n, 0);
  std::vector<char> mapped(n, 0), used(n, 0);
  mapped[0] = used[0] = 1;
  std::vector<Elem> dom{0};

  // a map with phi(a s) = phi(a) phi(s) for every mapped a and generator s is a hom
  std::function<bool(std::size_t)> go = [&](std::size_t k) -> bool {
    if (dom.size() == n) return true;
    if (k == gens.size()) return false;
    const Elem x = gens[k];
    if (mapped[x]) return go(k + 1);
    for (Elem y = 1; y < n; ++y) {
      if (used[y] || h.elem_order(y) != g.elem_order(x)) continue;
      std::vector<Elem> added;
      auto assign = [&](Elem a, Elem b) {
        if (mapped[a]) return map[a] == b;
        if (used[b]) return false;
        mapped[a] = used[b] = 1;
        map[a] = b;
        added.push_back(a);
        return true;
      };
      bool ok = assign(x, y);
      std::vector<Elem> queue = dom;
      queue.push_back(x);
      for (std::size_t head = 0; ok && head < queue.size(); ++head) {
        const Elem a = queue[head];
        for (std::size_t s = 0; s <= k && ok; ++s) {
          const Elem e = gens[s];
          const Elem ae = g.mul(a, e);
          const bool was = mapped[ae];
          ok = assign(ae, h.mul(map[a], map[e]));
          if (ok && !was) queue.push_back(ae);
        }
      }
      if (ok) {
        const std::size_t before = dom.size();
        for (auto a : added)
          dom.push_back(a);
        if (go(k + 1)) return true;
        dom.resize(before);
      }
      for (auto a : added) {
        mapped[a] = 0;
        used[map[a]] = 0;
      }
    }
    return false;
  };
  if (!go(0)) return std::nullopt;
  IsoWitness w{map};
  if (!verify_isomorphism(g, h, w.map)) throw InputError("oracle produced an invalid witness");
  return w;
}

// ---------------------------------------------------------------- series

// 1 = G_0 < G_1 < ... < G_m = G, built bottom-up through the filter layers.
struct CompatibleSeries {
  std::vector<Subgroup> terms;           // G_0 .. G_m
  std::vector<std::size_t> layer;        // per step: index into filter.layers()
  std::vector<Elem> generator;           // per step: G_j = <G_{j-1}, generator>
  std::vector<std::uint32_t> color;      // per step: vertex color of the generator's point
};

enum class SearchStrategy { Series, IR };

struct SeriesOptions {
  SearchStrategy strategy = SearchStrategy::Series;
  bool use_colors = true;
  std::size_t cap = 1'000'000;
};

namespace detail {

struct LayerView {
  const Layer* layer = nullptr;
  std::size_t hyper = 0;  // layer index in the hypergraph
};

// Filter layers from the bottom up, matched to hypergraph layers.
inline std::vector<LayerView> bottom_up_layers(const Filter& f, const ColoredHypergraph& h) {
  std::vector<LayerView> out;
  for (auto it = f.layers().rbegin(); it != f.layers().rend(); ++it) {
    if (is_zero(it->label)) throw NotNilpotent("series enumeration needs every layer to carry a label");
    auto idx = h.gs.index_of(it->label);
    if (!idx) throw InputError("hypergraph does not match the filter");
    out.push_back({&*it, *idx});
  }
  return out;
}

// Points of a layer allowed as generators: the smallest color class when it is
// small enough and spans the layer, otherwise every point.
inline std::vector<std::size_t> generator_pool(const ColoredHypergraph& h, const std::vector<std::uint32_t>& vcolor,
                                               const LayerView& lv, bool use_colors) {
  const auto& all = h.layer_vertices[lv.hyper];
  if (!use_colors) return all;
  std::map<std::uint32_t, std::vector<std::size_t>> classes;
  for (auto v : all) classes[vcolor[v]].push_back(v);
  const std::vector<std::size_t>* best = nullptr;
  for (const auto& [c, vs] : classes)
    if (!best || vs.size() < best->size()) best = &vs;
  const double vectors = static_cast<double>(best->size()) * (lv.layer->p - 1);
  const double bound = std::sqrt(std::pow(static_cast<double>(lv.layer->p), static_cast<double>(lv.layer->dim)));
  std::vector<Vec> pts;
  for (auto v : *best) pts.push_back(h.vertices[v].point);
  if (vectors < bound && Subspace::span_of(pts, lv.layer->dim, lv.layer->p).dim() == lv.layer->dim) return *best;
  return all;
}

}  // namespace detail

// Enumerates series whose generators come from the pool of each layer. When
// `colors` is given, step j must use a point of color colors[j] instead.
// Distinct subgroup chains are reported once.
inline std::vector<CompatibleSeries> enumerate_compatible_series(const Filter& f, const ColoredHypergraph& h,
                                                                 const StableColoring& sc, const SeriesOptions& opt,
                                                                 const std::vector<std::uint32_t>* colors = nullptr) {
  const Group& g = f.group();
  auto views = detail::bottom_up_layers(f, h);
  std::vector<CompatibleSeries> out;
  CompatibleSeries cur;
  cur.terms.push_back({0});
  std::set<std::vector<Subgroup>> seen;

  std::function<void(std::size_t, Subspace)> walk = [&](std::size_t li, Subspace span) {
    if (out.size() > opt.cap) throw CapExceeded("series enumeration exceeds cap");
    if (li == views.size()) {
      if (seen.insert(cur.terms).second) out.push_back(cur);
      return;
    }
    const auto& lv = views[li];
    const Layer& L = *lv.layer;
    if (span.dim() == L.dim) {
      walk(li + 1, Subspace(views.size() > li + 1 ? views[li + 1].layer->dim : 0,
                            views.size() > li + 1 ? views[li + 1].layer->p : 2));
      return;
    }
    const std::size_t step = cur.generator.size();
    std::vector<std::size_t> pool;
    if (colors) {
      if (step >= colors->size()) return;
      for (auto v : h.layer_vertices[lv.hyper])
        if (sc.vertex_colors[v] == (*colors)[step]) pool.push_back(v);
    } else {
      pool = detail::generator_pool(h, sc.vertex_colors, lv, opt.use_colors);
    }
    std::set<Subspace> tried;
    for (auto v : pool) {
      const Vec& pt = h.vertices[v].point;
      if (span.contains(pt)) continue;
      Subspace next = span.plus(Subspace::span_of({pt}, L.dim, L.p));
      if (!tried.insert(next).second) continue;
      Elem x = L.space.element_of(g, pt);
      std::vector<Elem> gens = cur.terms.back();
      gens.push_back(x);
      cur.terms.push_back(closure(g, gens));
      cur.layer.push_back(L.term);
      cur.generator.push_back(x);
      cur.color.push_back(sc.vertex_colors[v]);
      walk(li, next);
      cur.terms.pop_back();
      cur.layer.pop_back();
      cur.generator.pop_back();
      cur.color.pop_back();
    }
  };
  if (!views.empty()) walk(0, Subspace(views[0].layer->dim, views[0].layer->p));
  else out.push_back(cur);
  return out;
}

// An isomorphism G -> H with phi(G_j) = H_j for every j, by extending over
// each prime-index step G_j = G_{j-1} <x_j>.
inline std::optional<IsoWitness> series_isomorphism(const Group& g, const CompatibleSeries& sg, const Group& h,
                                                    const CompatibleSeries& sh) {
  if (sg.terms.size() != sh.terms.size() || g.order() != h.order()) return std::nullopt;
  for (std::size_t j = 0; j < sg.terms.size(); ++j)
    if (sg.terms[j].size() != sh.terms[j].size()) return std::nullopt;
  const std::size_t m = sg.generator.size();
  std::vector<Elem> map(g.order(), 0);

  std::function<bool(std::size_t)> go = [&](std::size_t j) -> bool {
    if (j == m) return true;
    const Elem x = sg.generator[j];
    const auto& prev_g = sg.terms[j];
    const auto& next_h = sh.terms[j + 1];
    const auto& prev_h = sh.terms[j];
    const std::uint64_t p = sg.terms[j + 1].size() / prev_g.size();
    const Elem xp = g.pow(x, p);
    for (auto y : next_h) {
      if (contains(prev_h, y)) continue;
      if (map[xp] != h.pow(y, p)) continue;
      bool ok = true;
      for (std::size_t i = 0; i < j && ok; ++i) {
        Elem gi = sg.generator[i];
        ok = map[g.conj(gi, x)] == h.conj(map[gi], y);
      }
      if (!ok) continue;
      // phi(a x^k) = phi(a) y^k
      Elem xk = 0, yk = 0;
      for (std::uint64_t k = 1; k < p; ++k) {
        xk = g.mul(xk, x);
        yk = h.mul(yk, y);
        for (auto a : prev_g) {
          Elem e = g.mul(a, xk);
          map[e] = h.mul(map[a], yk);
        }
      }
      if (go(j + 1)) return true;
    }
    return false;
  };
  if (!go(0)) return std::nullopt;
  if (!verify_isomorphism(g, h, map)) return std::nullopt;
  return IsoWitness{map};
}

// ---------------------------------------------------------------- IR

namespace detail {

inline std::vector<std::pair<std::uint32_t, std::size_t>> color_histogram(const std::vector<std::uint32_t>& c) {
  std::map<std::uint32_t, std::size_t> m;
  for (auto x : c) ++m[x];
  return {m.begin(), m.end()};
}

struct IRState {
  std::vector<std::uint32_t> colors;  // all incidence nodes
};

inline IRState individualize(const IncidenceGraph& ig, const IRState& st, std::size_t vertex, std::size_t depth,
                             ColorContext& ctx) {
  std::vector<std::uint32_t> start = st.colors;
  start[vertex] = ctx.intern({tag::kIndividual, depth, st.colors[vertex]});
  StableColoring sc = wl_refine_from(ig, 1, ctx, start);
  return {node_colors(sc)};
}

}  // namespace detail

struct IRSeriesResult {
  CompatibleSeries series;
  std::vector<std::vector<std::pair<std::uint32_t, std::size_t>>> signatures;  // per depth
};

// G side: one series, each generator individualized and refined in turn;
// generators come from the smallest class of the current coloring.
inline IRSeriesResult ir_fixed_series(const Filter& f, const ColoredHypergraph& h, const IncidenceGraph& ig,
                                      const StableColoring& sc, ColorContext& ctx) {
  const Group& g = f.group();
  auto views = detail::bottom_up_layers(f, h);
  IRSeriesResult r;
  r.series.terms.push_back({0});
  detail::IRState st{node_colors(sc)};
  for (const auto& lv : views) {
    const Layer& L = *lv.layer;
    Subspace span(L.dim, L.p);
    while (span.dim() < L.dim) {
      std::map<std::uint32_t, std::vector<std::size_t>> classes;
      for (auto v : h.layer_vertices[lv.hyper])
        if (!span.contains(h.vertices[v].point)) classes[st.colors[v]].push_back(v);
      const std::vector<std::size_t>* best = nullptr;
      for (const auto& [c, vs] : classes)
        if (!best || vs.size() < best->size()) best = &vs;
      std::size_t v = best->front();
      const Vec& pt = h.vertices[v].point;
      span = span.plus(Subspace::span_of({pt}, L.dim, L.p));
      Elem x = L.space.element_of(g, pt);
      auto gens = r.series.terms.back();
      gens.push_back(x);
      r.series.terms.push_back(closure(g, gens));
      r.series.layer.push_back(L.term);
      r.series.generator.push_back(x);
      r.series.color.push_back(st.colors[v]);
      st = detail::individualize(ig, st, v, r.series.generator.size(), ctx);
      r.signatures.push_back(detail::color_histogram(st.colors));
    }
  }
  return r;
}

// H side: every series whose individualize-and-refine trace matches the G trace.
inline std::vector<CompatibleSeries> ir_enumerate(const Filter& f, const ColoredHypergraph& h, const IncidenceGraph& ig,
                                                  const StableColoring& sc, const IRSeriesResult& target,
                                                  ColorContext& ctx, std::size_t cap) {
  const Group& g = f.group();
  auto views = detail::bottom_up_layers(f, h);
  std::vector<CompatibleSeries> out;
  CompatibleSeries cur;
  cur.terms.push_back({0});
  std::set<std::vector<Subgroup>> seen;

  std::function<void(std::size_t, Subspace, const detail::IRState&)> walk = [&](std::size_t li, Subspace span,
                                                                               const detail::IRState& st) {
    if (out.size() > cap) throw CapExceeded("series enumeration exceeds cap");
    if (li == views.size()) {
      if (seen.insert(cur.terms).second) out.push_back(cur);
      return;
    }
    const Layer& L = *views[li].layer;
    if (span.dim() == L.dim) {
      if (li + 1 < views.size()) walk(li + 1, Subspace(views[li + 1].layer->dim, views[li + 1].layer->p), st);
      else walk(li + 1, span, st);
      return;
    }
    const std::size_t step = cur.generator.size();
    if (step >= target.series.color.size()) return;
    for (auto v : h.layer_vertices[views[li].hyper]) {
      const Vec& pt = h.vertices[v].point;
      if (st.colors[v] != target.series.color[step] || span.contains(pt)) continue;
      auto next_state = detail::individualize(ig, st, v, step + 1, ctx);
      if (detail::color_histogram(next_state.colors) != target.signatures[step]) continue;  // thrown away
      Elem x = L.space.element_of(g, pt);
      auto gens = cur.terms.back();
      gens.push_back(x);
      cur.terms.push_back(closure(g, gens));
      cur.layer.push_back(L.term);
      cur.generator.push_back(x);
      cur.color.push_back(st.colors[v]);
      walk(li, span.plus(Subspace::span_of({pt}, L.dim, L.p)), next_state);
      cur.terms.pop_back();
      cur.layer.pop_back();
      cur.generator.pop_back();
      cur.color.pop_back();
    }
  };
  if (views.empty()) out.push_back(cur);
  else walk(0, Subspace(views[0].layer->dim, views[0].layer->p), detail::IRState{node_colors(sc)});
  return out;
}

// ---------------------------------------------------------------- top level

struct IsoConfig {
  std::size_t g = 1;
  std::size_t k = 1;
  SearchStrategy strategy = SearchStrategy::Series;
  bool use_colors = true;
  std::size_t cap = 1'000'000;
};

struct IsoResult {
  std::optional<IsoWitness> witness;
  std::size_t series_enumerated = 0;   // H-series tried before deciding
  std::size_t series_candidates = 0;   // H-series produced by the enumeration
  bool rejected_by_signature = false;
  bool isomorphic() const { return witness.has_value(); }
};

inline IsoResult isomorphism_test(const Group& a, const Group& b, const IsoConfig& cfg = {}) {
  if (!is_nilpotent(a) || !is_nilpotent(b)) throw NotNilpotent("isomorphism_test expects nilpotent groups");
  IsoResult res;
  if (a.order() != b.order()) return res;
  ColorContext ctx;
  JointResult j = joint_pipeline(a, b, cfg.g, cfg.k, ctx);
  if (!j.signatures_match()) {
    res.rejected_by_signature = true;
    return res;
  }
  const auto& ra = j.first;
  const auto& rb = j.second;
  if (cfg.strategy == SearchStrategy::IR) {
    // IR refines the stable 1-WL coloring; k=2 colors only seed the first round
    auto target = ir_fixed_series(ra.filter, ra.hypergraph, ra.incidence, ra.coloring, ctx);
    auto hs = ir_enumerate(rb.filter, rb.hypergraph, rb.incidence, rb.coloring, target, ctx, cfg.cap);
    res.series_candidates = hs.size();
    for (const auto& s : hs) {
      ++res.series_enumerated;
      if (auto w = series_isomorphism(a, target.series, b, s)) {
        res.witness = std::move(w);
        return res;
      }
    }
    return res;
  }
  SeriesOptions opt{cfg.strategy, cfg.use_colors, cfg.cap};
  auto gs = enumerate_compatible_series(ra.filter, ra.hypergraph, ra.coloring, opt);
  if (gs.empty()) return res;
  const auto& sigma = gs.front();
  std::vector<CompatibleSeries> hs;
  if (cfg.use_colors) hs = enumerate_compatible_series(rb.filter, rb.hypergraph, rb.coloring, opt, &sigma.color);
  else hs = enumerate_compatible_series(rb.filter, rb.hypergraph, rb.coloring, opt);
  res.series_candidates = hs.size();
  for (const auto& s : hs) {
    ++res.series_enumerated;
    if (auto w = series_isomorphism(a, sigma, b, s)) {
      res.witness = std::move(w);
      return res;
    }
  }
  return res;
}

// ---------------------------------------------------------------- stats

struct SearchStats {
  std::size_t width = 0;
  double color_ratio = 1.0;
  std::vector<std::size_t> layer_dims;
  std::vector<std::vector<std::size_t>> class_sizes;  // per layer, descending
};

// |C_s| counts the nonzero vectors on the points of the smallest class.
inline SearchStats stats(const Filter& f, const ColoredHypergraph& h, const StableColoring& sc) {
  SearchStats st;
  for (std::size_t s = 0; s < h.gs.layers.size(); ++s) {
    const auto& L = h.gs.layers[s];
    st.layer_dims.push_back(L.dim);
    st.width = std::max(st.width, L.dim);
    auto sizes = layer_class_sizes(h, sc, s);
    st.color_ratio *= std::pow(static_cast<double>(L.p), static_cast<double>(L.dim)) /
                      (static_cast<double>(sizes.back()) * (L.p - 1));
    st.class_sizes.push_back(std::move(sizes));
  }
  (void)f;
  return st;
}

}  // namespace gpiso
