#pragma once

// Replay of the worked genus-1 example: the 3-dimensional top layer of the
// graded structure of worked_example_tuple(), refined by 1-WL.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gpiso/bimaps.hpp"
#include "gpiso/filters.hpp"
#include "gpiso/hypergraph.hpp"

namespace gpiso {

struct WorkedExampleReplay {
  std::string dump;
  bool initial_ranks = false;  // rank-2 hyperplanes exactly the expected four
  bool round1_points = false;  // point classes {4,6,3}, the 4-class as expected
  bool round2_duals = false;   // hyperplane classes {4,6,3}
  bool stable = false;         // no change after round 2
  std::size_t rounds = 0;
  bool matches() const { return initial_ranks && round1_points && round2_duals && stable; }
};

inline std::set<Vec> worked_example_green() { return {{0, 0, 1}, {0, 1, 0}, {1, 1, 2}, {1, 2, 1}}; }

namespace detail {

// class sizes (descending) and members of each class among the given nodes
inline std::map<std::uint32_t, std::set<Vec>> classes_of(const std::vector<std::uint32_t>& colors,
                                                         const std::vector<std::pair<std::size_t, Vec>>& nodes) {
  std::map<std::uint32_t, std::set<Vec>> out;
  for (const auto& [i, v] : nodes) out[colors[i]].insert(v);
  return out;
}

inline std::vector<std::size_t> sizes_of(const std::map<std::uint32_t, std::set<Vec>>& cls) {
  std::vector<std::size_t> s;
  for (const auto& [c, m] : cls) s.push_back(m.size());
  std::sort(s.rbegin(), s.rend());
  return s;
}

inline bool has_class(const std::map<std::uint32_t, std::set<Vec>>& cls, const std::set<Vec>& want) {
  return std::any_of(cls.begin(), cls.end(), [&](const auto& kv) { return kv.second == want; });
}

}  // namespace detail

inline WorkedExampleReplay replay_worked_example() {
  WorkedExampleReplay r;
  ColorContext ctx;
  const MatrixTuple t = worked_example_tuple();
  auto gs = graded_from_tuple(t);
  auto h = build_hypergraph(gs, 1, ctx);
  auto ig = incidence_graph(h, ctx);
  auto sc = wl_refine(ig, 1, ctx);
  r.dump = dump_coloring(h, sc);
  r.rounds = sc.rounds;

  std::size_t top = gs.layers.size();
  for (std::size_t s = 0; s < gs.layers.size(); ++s)
    if (gs.layers[s].dim == t.m()) top = s;
  if (top == gs.layers.size()) return r;

  const std::size_t nv = h.vertices.size();
  std::vector<std::pair<std::size_t, Vec>> points, duals;
  for (auto v : h.layer_vertices[top]) points.push_back({v, h.vertices[v].point});
  for (std::size_t e = 0; e < h.edges.size(); ++e) {
    const auto& he = h.edges[e];
    if (he.layer != top || he.kind != EdgeKind::Codim || !he.subspace) continue;
    Subspace perp = he.subspace->perp();
    if (perp.dim() != 1) continue;
    Vec n = perp.basis().row(0);
    normalize_projective(n, t.q);
    duals.push_back({nv + e, n});
  }
  if (sc.trace.size() < 3 || points.size() != 13 || duals.size() != 13) return r;

  const auto green = worked_example_green();
  auto c0 = detail::classes_of(sc.trace[0], duals);
  r.initial_ranks = detail::sizes_of(c0) == std::vector<std::size_t>{9, 4} && detail::has_class(c0, green);
  auto c1 = detail::classes_of(sc.trace[1], points);
  r.round1_points = detail::sizes_of(c1) == std::vector<std::size_t>{6, 4, 3} && detail::has_class(c1, green);
  auto c2 = detail::classes_of(sc.trace[2], duals);
  r.round2_duals = detail::sizes_of(c2) == std::vector<std::size_t>{6, 4, 3};
  r.stable = sc.rounds == 2;
  return r;
}

}  // namespace gpiso
