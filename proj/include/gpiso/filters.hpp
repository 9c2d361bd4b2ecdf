#pragma once

// Filters phi: N^d -> normal subgroups, stored as a strictly decreasing chain
// of terms at their least labels. Labels are compared colexicographically
// (last coordinate first); phi_u is the term at the largest stored label <= u.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gpiso/bimaps.hpp"
#include "gpiso/error.hpp"
#include "gpiso/groups.hpp"

namespace gpiso {

using Label = std::vector<std::uint32_t>;

inline bool colex_less(const Label& a, const Label& b) {
  for (std::size_t i = a.size(); i-- > 0;)
    if (a[i] != b[i]) return a[i] < b[i];
  return false;
}

inline bool colex_leq(const Label& a, const Label& b) { return !colex_less(b, a); }

inline Label add(const Label& a, const Label& b) {
  Label r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Label unit(std::size_t d, std::size_t i) {
  Label e(d, 0);
  e[i] = 1;
  return e;
}

inline bool is_zero(const Label& a) {
  return std::all_of(a.begin(), a.end(), [](std::uint32_t x) { return x == 0; });
}

inline std::string label_string(const Label& a) {
  std::string s = "(";
  for (std::size_t i = 0; i < a.size(); ++i) s += (i ? "," : "") + std::to_string(a[i]);
  return s + ")";
}

struct FilterTerm {
  Label label;
  Subgroup subgroup;
};

// top/bottom are consecutive terms; the layer sits at `label`.
struct Layer {
  Label label;
  std::size_t term = 0;
  std::uint32_t p = 0;
  std::size_t dim = 0;
  LayerSpace space;
};

class Filter {
 public:
  Filter() = default;

  Filter(std::shared_ptr<const Group> g, std::size_t d, std::vector<FilterTerm> terms)
      : group_(std::move(g)), d_(d), terms_(std::move(terms)) {
    if (terms_.empty() || !is_zero(terms_[0].label) || terms_[0].subgroup.size() != group_->order())
      throw InputError("a filter starts with the whole group at label 0");
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (terms_[i].label.size() != d_) throw InputError("label has the wrong dimension");
      if (i > 0) {
        if (!colex_less(terms_[i - 1].label, terms_[i].label)) throw InputError("labels must increase");
        if (!is_subset(terms_[i].subgroup, terms_[i - 1].subgroup) ||
            terms_[i].subgroup.size() == terms_[i - 1].subgroup.size())
          throw InputError("terms must strictly decrease");
      }
    }
    if (terms_.back().subgroup.size() != 1) throw InputError("a filter ends with the trivial group");
    build_layers();
  }

  const Group& group() const { return *group_; }
  std::shared_ptr<const Group> group_ptr() const { return group_; }
  std::size_t dim() const { return d_; }
  const std::vector<FilterTerm>& terms() const { return terms_; }
  const std::vector<Layer>& layers() const { return layers_; }

  std::size_t term_index_at(const Label& u) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < terms_.size(); ++i)
      if (colex_leq(terms_[i].label, u)) idx = i;
    return idx;
  }

  const Subgroup& at(const Label& u) const { return terms_[term_index_at(u)].subgroup; }

  // <phi_{s+t} : t != 0>, which on a chain is phi_{s+e_1}.
  const Subgroup& boundary(const Label& s) const { return at(add(s, unit(d_, 0))); }

  std::vector<Subgroup> image() const {
    std::vector<Subgroup> out;
    for (const auto& t : terms_) out.push_back(t.subgroup);
    return out;
  }

  const Layer* layer_at(const Label& s) const {
    for (const auto& l : layers_)
      if (l.label == s) return &l;
    return nullptr;
  }

  // Layers with nonzero label (the ones carrying vector-space structure).
  std::vector<const Layer*> nonzero_layers() const {
    std::vector<const Layer*> out;
    for (const auto& l : layers_)
      if (!is_zero(l.label)) out.push_back(&l);
    return out;
  }

 private:
  // A term's layer label is the next stored label minus the unit vector at
  // its first nonzero coordinate, or the term's own label when that falls
  // below it.
  void build_layers() {
    layers_.clear();
    for (std::size_t i = 0; i + 1 < terms_.size(); ++i) {
      const Label& next = terms_[i + 1].label;
      Label s = next;
      std::size_t j = 0;
      while (s[j] == 0) ++j;
      --s[j];
      if (colex_less(s, terms_[i].label)) s = terms_[i].label;
      Layer l;
      l.label = s;
      l.term = i;
      if (!is_zero(s)) {
        l.space = layer_space(*group_, terms_[i].subgroup, terms_[i + 1].subgroup);
        l.p = l.space.p;
        l.dim = l.space.dim;
      }
      layers_.push_back(std::move(l));
    }
  }

  std::shared_ptr<const Group> group_;
  std::size_t d_ = 1;
  std::vector<FilterTerm> terms_;
  std::vector<Layer> layers_;
};

// Labels where the commutator condition is checked: stored and layer labels.
inline std::vector<Label> checked_labels(const Filter& f) {
  std::vector<Label> out;
  for (const auto& t : f.terms()) out.push_back(t.label);
  for (const auto& l : f.layers()) out.push_back(l.label);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Monotone chain plus [phi_s, phi_t] <= phi_{s+t} over all checked label pairs.
inline bool verify_filter_axioms(const Filter& f, std::string* why = nullptr) {
  const auto& terms = f.terms();
  const Group& g = f.group();
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (!is_normal(g, terms[i].subgroup)) {
      if (why) *why = "term " + label_string(terms[i].label) + " is not normal";
      return false;
    }
    if (i > 0 && !is_subset(terms[i].subgroup, terms[i - 1].subgroup)) {
      if (why) *why = "chain is not monotone";
      return false;
    }
  }
  const std::size_t k = terms.size();
  std::vector<std::vector<std::optional<Subgroup>>> comm(k, std::vector<std::optional<Subgroup>>(k));
  auto labels = checked_labels(f);
  for (const auto& s : labels)
    for (const auto& t : labels) {
      std::size_t i = f.term_index_at(s), j = f.term_index_at(t);
      if (i > j) std::swap(i, j);
      if (!comm[i][j]) comm[i][j] = commutator_subgroup(g, terms[i].subgroup, terms[j].subgroup);
      if (!is_subset(*comm[i][j], f.at(add(s, t)))) {
        if (why) *why = "[phi" + label_string(s) + ", phi" + label_string(t) + "] not in phi" + label_string(add(s, t));
        return false;
      }
    }
  return true;
}

// G > prod_{j>=1} O_{p_j} > ... with [phi, F(G)] phi^p steps per prime,
// primes ascending. F(G) is the Fitting subgroup.
inline Filter initial_filter(std::shared_ptr<const Group> gp) {
  const Group& g = *gp;
  auto primes = prime_factors(g.order());
  const std::size_t c = std::max<std::size_t>(primes.size(), 1);
  std::vector<FilterTerm> terms{{Label(c, 0), g.whole()}};
  if (primes.empty()) return Filter(gp, c, terms);
  std::vector<Subgroup> cores;
  for (auto p : primes) cores.push_back(p_core(g, p));
  Subgroup fit = Group::trivial();
  for (const auto& o : cores) fit = product(g, fit, o);
  for (std::size_t i = 0; i < primes.size(); ++i) {
    Subgroup cur = Group::trivial();
    for (std::size_t j = i; j < primes.size(); ++j) cur = product(g, cur, cores[j]);
    Label lab = unit(c, i);
    while (true) {
      if (cur != terms.back().subgroup) terms.push_back({lab, cur});
      Subgroup next = product(g, commutator_subgroup(g, cur, fit), power_subgroup(g, cur, primes[i]));
      if (next == cur) break;
      cur = std::move(next);
      ++lab[i];
    }
  }
  return Filter(gp, c, terms);
}

inline Filter initial_filter(const Group& g) { return initial_filter(std::make_shared<const Group>(g)); }

inline std::size_t width(const Filter& f) {
  std::size_t w = 0;
  for (const auto* l : f.nonzero_layers()) w = std::max(w, l->dim);
  return w;
}

// The bracket L_s x L_t -> L_{s+t} as d_{s+t} matrices of shape d_s x d_t.
inline MatrixTuple layer_bimap(const Filter& f, const Label& s, const Label& t) {
  const Layer* ls = f.layer_at(s);
  const Layer* lt = f.layer_at(t);
  const Layer* lu = f.layer_at(add(s, t));
  if (!ls || !lt || !lu || is_zero(s) || is_zero(t) || ls->dim == 0 || lt->dim == 0 || lu->dim == 0)
    throw TrivialLayer("bracket " + label_string(s) + "x" + label_string(t) + " involves a trivial layer");
  if (ls->p != lt->p || ls->p != lu->p) throw MixedPrimes("layers over different primes");
  const Group& g = f.group();
  const std::uint32_t p = ls->p;
  const auto& bottom_u = lu->space.bottom;
  const auto& top_u = lu->space.top;
  auto check = [&](Elem x, Elem y) {
    Elem c = g.comm(x, y);
    if (!contains(top_u, c)) throw NotWellDefined("commutator leaves phi" + label_string(add(s, t)));
    return c;
  };
  // well-definedness on generators of the boundaries
  for (auto z : generators_of(g, ls->space.bottom))
    for (auto y : lt->space.basis)
      if (!contains(bottom_u, check(z, y))) throw NotWellDefined("bracket depends on representatives");
  for (auto z : generators_of(g, lt->space.bottom))
    for (auto x : ls->space.basis)
      if (!contains(bottom_u, check(x, z))) throw NotWellDefined("bracket depends on representatives");
  std::vector<Matrix> mats(lu->dim, Matrix(ls->dim, lt->dim, p));
  for (std::size_t a = 0; a < ls->dim; ++a)
    for (std::size_t b = 0; b < lt->dim; ++b) {
      Vec v = lu->space.vector_of(check(ls->space.basis[a], lt->space.basis[b]));
      for (std::size_t k = 0; k < lu->dim; ++k) mats[k](a, b) = v[k];
    }
  return tuple_of(std::move(mats), ls->dim, lt->dim, p);
}

inline Filter relabel_filter(const Filter& f, std::size_t d, const std::vector<Label>& labels,
                             const std::vector<Subgroup>& subs) {
  std::vector<FilterTerm> terms;
  for (std::size_t i = 0; i < labels.size(); ++i) terms.push_back({labels[i], subs[i]});
  return Filter(f.group_ptr(), d, std::move(terms));
}

// Insert a normal subgroup H strictly between two consecutive terms. The new
// filter lives on N^{d+1}: old label u becomes (0,u) and H goes to (1,v) for
// some v in [l_i, l_{i+1}). If no v passes the axioms, the chain is relabeled
// along a single coordinate with labels 0, 2, 5, 11, ... which always works.
inline Filter refine_with(const Filter& f, const Subgroup& h) {
  const Group& g = f.group();
  if (!is_subgroup(g, h) || !is_normal(g, h)) throw NotNormal("refining subgroup is not normal");
  const auto& terms = f.terms();
  for (const auto& t : terms)
    if (t.subgroup == h) return f;
  std::size_t pos = terms.size();
  for (std::size_t i = 0; i + 1 < terms.size(); ++i)
    if (is_subset(terms[i + 1].subgroup, h) && is_subset(h, terms[i].subgroup)) pos = i;
  if (pos == terms.size()) throw NotBetweenLayers("subgroup is not between consecutive terms");
  const std::size_t d = f.dim();
  const Label& lo = terms[pos].label;
  const Label& hi = terms[pos + 1].label;
  std::vector<Label> candidates{f.layers()[pos].label, lo};
  auto labels = checked_labels(f);
  for (const auto& a : labels)
    for (const auto& b : labels) {
      Label s = add(a, b);
      if (colex_leq(lo, s) && colex_less(s, hi)) candidates.push_back(s);
    }
  std::vector<Label> seen;
  for (const auto& v : candidates) {
    if (std::find(seen.begin(), seen.end(), v) != seen.end()) continue;
    seen.push_back(v);
    std::vector<Label> nl;
    std::vector<Subgroup> ns;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      Label u{0};
      u.insert(u.end(), terms[i].label.begin(), terms[i].label.end());
      nl.push_back(u);
      ns.push_back(terms[i].subgroup);
      if (i == pos) {
        Label w{1};
        w.insert(w.end(), v.begin(), v.end());
        nl.push_back(w);
        ns.push_back(h);
      }
    }
    try {
      Filter cand = relabel_filter(f, d + 1, nl, ns);
      if (verify_filter_axioms(cand)) return cand;
    } catch (const NotElementaryAbelian&) {
      // this placement made an invalid layer; try the next one
    }
  }
  std::vector<Label> nl;
  std::vector<Subgroup> ns;
  std::uint32_t a = 0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    Label u(d + 1, 0);
    u[0] = a;
    nl.push_back(u);
    ns.push_back(terms[i].subgroup);
    a = a == 0 ? 2 : 2 * a + 1;
    if (i == pos) {
      Label w(d + 1, 0);
      w[0] = a;
      nl.push_back(w);
      ns.push_back(h);
      a = 2 * a + 1;
    }
  }
  Filter out = relabel_filter(f, d + 1, nl, ns);
  std::string why;
  if (!verify_filter_axioms(out, &why)) throw Error("refinement failed: " + why);
  return out;
}

struct Truncation {
  Quotient quotient;
  Filter filter;
};

// Push the terms containing phi_s through G -> G/phi_s.
inline Truncation truncate(const Filter& f, const Label& s) {
  const std::size_t m = f.term_index_at(s);
  const Group& g = f.group();
  Quotient q = quotient(g, f.terms()[m].subgroup);
  auto qg = std::make_shared<const Group>(q.group);
  std::vector<FilterTerm> terms;
  for (std::size_t i = 0; i <= m; ++i) terms.push_back({f.terms()[i].label, image(q, f.terms()[i].subgroup)});
  Filter tf(qg, f.dim(), std::move(terms));
  return Truncation{std::move(q), std::move(tf)};
}

// ---------------------------------------------------------------- graded view

struct GradedLayer {
  Label label;
  std::uint32_t p = 0;
  std::size_t dim = 0;
};

// Bracket between layers s and t landing in layer `target` (indices).
struct GradedBracket {
  std::size_t s = 0, t = 0, target = 0;
  MatrixTuple map;
};

struct GradedStructure {
  std::vector<GradedLayer> layers;
  std::vector<GradedBracket> brackets;

  const GradedBracket* find(std::size_t s, std::size_t t) const {
    for (const auto& b : brackets)
      if (b.s == s && b.t == t) return &b;
    return nullptr;
  }
  std::optional<std::size_t> index_of(const Label& l) const {
    for (std::size_t i = 0; i < layers.size(); ++i)
      if (layers[i].label == l) return i;
    return std::nullopt;
  }
};

// Nontrivial layers at nonzero labels with every well-defined bracket.
inline GradedStructure graded_structure(const Filter& f) {
  GradedStructure gs;
  for (const auto* l : f.nonzero_layers())
    if (l->dim > 0) gs.layers.push_back({l->label, l->p, l->dim});
  for (std::size_t i = 0; i < gs.layers.size(); ++i)
    for (std::size_t j = 0; j < gs.layers.size(); ++j) {
      auto target = gs.index_of(add(gs.layers[i].label, gs.layers[j].label));
      if (!target) continue;
      if (gs.layers[i].p != gs.layers[j].p || gs.layers[i].p != gs.layers[*target].p) continue;
      try {
        gs.brackets.push_back({i, j, *target, layer_bimap(f, gs.layers[i].label, gs.layers[j].label)});
      } catch (const NotWellDefined&) {
        // skipped: depends only on the filter, so both groups skip it alike
      }
    }
  return gs;
}

// Two-layer structure L_1 = F^n, L_2 = F^m with the tuple as L_1 x L_1 -> L_2.
inline GradedStructure graded_from_tuple(const MatrixTuple& t) {
  if (t.n != t.n2) throw ShapeMismatch("graded_from_tuple needs square matrices");
  GradedStructure gs;
  gs.layers.push_back({Label{1}, t.q, t.n});
  gs.layers.push_back({Label{2}, t.q, t.m()});
  gs.brackets.push_back({0, 0, 1, t});
  return gs;
}

}  // namespace gpiso
