#pragma once

// Helpers shared by the unit tests and the acceptance binary.

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gpiso/gpiso.hpp"

namespace gpiso::testing {

struct HeredityCheck {
  std::size_t truncations = 0;  // quotients compared
  std::size_t skipped = 0;      // truncations over a cap
  bool ok = true;
};

// For every nonzero term label s, the stable coloring of G restricted to the
// layers that survive in G/phi_s must refine the stable coloring computed
// from the truncated filter. Points are matched through group elements.
inline HeredityCheck quotient_heredity(const PipelineResult& r, std::size_t genus, std::size_t k) {
  HeredityCheck out;
  const Filter& f = r.filter;
  const Group& g = f.group();
  const auto& h = r.hypergraph;
  for (std::size_t ti = 1; ti < f.terms().size(); ++ti) {
    const Label s = f.terms()[ti].label;
    Truncation tr = truncate(f, s);
    ColorContext ctx;
    ColoredHypergraph th;
    StableColoring tc;
    try {
      th = build_hypergraph(graded_structure(tr.filter), genus, ctx);
      tc = wl_refine(incidence_graph(th, ctx), k, ctx);
    } catch (const CapExceeded&) {
      ++out.skipped;
      continue;
    }
    std::vector<std::uint32_t> fine, coarse;
    for (std::size_t li = 0; li < th.gs.layers.size(); ++li) {
      const Label& lab = th.gs.layers[li].label;
      auto full_idx = h.gs.index_of(lab);
      const Layer* full_layer = f.layer_at(lab);
      const Layer* q_layer = tr.filter.layer_at(lab);
      if (!full_idx || !full_layer || !q_layer) {
        out.ok = false;
        continue;
      }
      for (auto v : h.layer_vertices[*full_idx]) {
        Elem e = full_layer->space.element_of(g, h.vertices[v].point);
        Vec w = q_layer->space.vector_of(tr.quotient.proj[e]);
        fine.push_back(r.coloring.vertex_colors[v]);
        coarse.push_back(tc.vertex_colors[th.vertex_of(li, w)]);
      }
    }
    ++out.truncations;
    if (!refines(fine, coarse)) out.ok = false;
  }
  return out;
}

inline Group corpus_group(const std::string& name) {
  for (auto& ng : library::corpus20())
    if (ng.name == name) return std::move(ng.group);
  throw InputError("no corpus group " + name);
}

inline Group relabeled(const Group& g, std::mt19937_64& rng) { return relabel(g, random_relabeling(g.order(), rng)); }

}  // namespace gpiso::testing
