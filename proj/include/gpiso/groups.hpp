#pragma once

// Finite groups as Cayley tables (identity at index 0) plus matrix groups over
// Z/b. Subgroups of a Cayley group are sorted element-index vectors.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "gpiso/error.hpp"
#include "gpiso/linalg.hpp"

namespace gpiso {

using Elem = std::uint32_t;
using Subgroup = std::vector<Elem>;

inline constexpr std::size_t kCayleyCap = 5000;

class Group {
 public:
  Group() = default;

  // table[i*n+j] = i*j; element 0 must be the identity.
  Group(std::size_t n, std::vector<std::uint16_t> table) : n_(n), table_(std::move(table)) {
    if (n == 0 || n > kCayleyCap) throw CapExceeded("cayley order " + std::to_string(n) + " outside (0, 5000]");
    if (table_.size() != n * n) throw InputError("cayley table has wrong size");
    for (auto x : table_)
      if (x >= n) throw InputError("cayley table entry out of range");
    for (std::size_t i = 0; i < n; ++i)
      if (mul(0, i) != i || mul(i, 0) != i) throw InputError("element 0 is not the identity");
    inv_.assign(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (mul(i, j) == 0) {
          inv_[i] = static_cast<Elem>(j);
          break;
        }
    for (std::size_t i = 0; i < n; ++i)
      if (inv_[i] == n || mul(inv_[i], i) != 0) throw InputError("element without two-sided inverse");
    order_.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      Elem x = static_cast<Elem>(i);
      std::uint32_t k = 1;
      while (x != 0) {
        x = mul(x, static_cast<Elem>(i));
        ++k;
        if (k > n) throw InputError("element of unbounded order");
      }
      order_[i] = k;
    }
  }

  std::size_t order() const { return n_; }
  Elem mul(Elem a, Elem b) const { return table_[static_cast<std::size_t>(a) * n_ + b]; }
  Elem inv(Elem a) const { return inv_[a]; }
  // g^-1 a g
  Elem conj(Elem a, Elem g) const { return mul(mul(inv(g), a), g); }
  // a^-1 b^-1 a b
  Elem comm(Elem a, Elem b) const { return mul(mul(inv(a), inv(b)), mul(a, b)); }
  Elem pow(Elem a, std::uint64_t k) const {
    k %= order_[a];
    Elem r = 0;
    while (k--) r = mul(r, a);
    return r;
  }
  std::uint32_t elem_order(Elem a) const { return order_[a]; }
  const std::vector<std::uint16_t>& table() const { return table_; }

  Subgroup whole() const {
    Subgroup s(n_);
    for (std::size_t i = 0; i < n_; ++i) s[i] = static_cast<Elem>(i);
    return s;
  }
  static Subgroup trivial() { return Subgroup{0}; }

  bool is_abelian() const {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j)
        if (mul(i, j) != mul(j, i)) return false;
    return true;
  }

  // Exhaustive associativity for n <= 256, sampled triples above.
  bool verify_axioms(std::size_t samples = 100000, std::uint64_t seed = 1) const {
    if (n_ <= 256) {
      for (std::size_t a = 0; a < n_; ++a)
        for (std::size_t b = 0; b < n_; ++b) {
          Elem ab = mul(a, b);
          for (std::size_t c = 0; c < n_; ++c)
            if (mul(ab, c) != mul(a, mul(b, c))) return false;
        }
      return true;
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Elem> pick(0, static_cast<Elem>(n_ - 1));
    for (std::size_t i = 0; i < samples; ++i) {
      Elem a = pick(rng), b = pick(rng), c = pick(rng);
      if (mul(mul(a, b), c) != mul(a, mul(b, c))) return false;
    }
    return true;
  }

  friend bool operator==(const Group& x, const Group& y) { return x.n_ == y.n_ && x.table_ == y.table_; }

 private:
  std::size_t n_ = 0;
  std::vector<std::uint16_t> table_;
  std::vector<Elem> inv_;
  std::vector<std::uint32_t> order_;
};

// Build a Cayley table by breadth-first closure of generators under right
// multiplication. T needs operator< (used as map key).
template <class T, class Mul>
Group group_from_generators(const T& identity, const std::vector<T>& gens, Mul mul, std::size_t cap = kCayleyCap,
                            std::vector<T>* elements_out = nullptr) {
  std::vector<T> elems{identity};
  std::map<T, Elem> index{{identity, 0}};
  std::vector<std::pair<Elem, std::size_t>> parent{{0, 0}};  // elem = parent * gens[s]
  std::vector<std::vector<Elem>> right;                      // right[i][s] = i * gens[s]
  for (std::size_t i = 0; i < elems.size(); ++i) {
    right.emplace_back(gens.size());
    for (std::size_t s = 0; s < gens.size(); ++s) {
      T y = mul(elems[i], gens[s]);
      auto it = index.find(y);
      if (it == index.end()) {
        if (elems.size() >= cap) throw CapExceeded("group order exceeds cap " + std::to_string(cap));
        Elem id = static_cast<Elem>(elems.size());
        index.emplace(y, id);
        elems.push_back(std::move(y));
        parent.emplace_back(static_cast<Elem>(i), s);
        right[i][s] = id;
      } else {
        right[i][s] = it->second;
      }
    }
  }
  const std::size_t n = elems.size();
  std::vector<std::uint16_t> table(n * n);
  // column j: i*j = (i*parent(j)) * gen
  for (std::size_t i = 0; i < n; ++i) table[i * n] = static_cast<std::uint16_t>(i);
  for (std::size_t j = 1; j < n; ++j) {
    auto [pj, s] = parent[j];
    for (std::size_t i = 0; i < n; ++i) table[i * n + j] = static_cast<std::uint16_t>(right[table[i * n + pj]][s]);
  }
  if (elements_out) *elements_out = std::move(elems);
  return Group(n, std::move(table));
}

// Rename elements by perm (perm[old] = new, perm[0] must be 0).
inline Group relabel(const Group& g, const std::vector<Elem>& perm) {
  const std::size_t n = g.order();
  if (perm.size() != n || perm[0] != 0) throw InputError("relabel permutation must fix the identity");
  std::vector<std::uint16_t> t(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) t[perm[i] * n + perm[j]] = static_cast<std::uint16_t>(perm[g.mul(i, j)]);
  return Group(n, std::move(t));
}

inline std::vector<Elem> random_relabeling(std::size_t n, std::mt19937_64& rng) {
  std::vector<Elem> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<Elem>(i);
  std::shuffle(perm.begin() + 1, perm.end(), rng);
  return perm;
}

// ---------------------------------------------------------------- subgroups

inline bool contains(const Subgroup& h, Elem x) { return std::binary_search(h.begin(), h.end(), x); }

inline Subgroup closure(const Group& g, const std::vector<Elem>& gens) {
  std::vector<char> seen(g.order(), 0);
  std::vector<Elem> out{0};
  seen[0] = 1;
  std::vector<Elem> useful;
  for (auto x : gens)
    if (x != 0) useful.push_back(x);
  for (std::size_t i = 0; i < out.size(); ++i)
    for (auto s : useful) {
      Elem y = g.mul(out[i], s);
      if (!seen[y]) {
        seen[y] = 1;
        out.push_back(y);
      }
    }
  std::sort(out.begin(), out.end());
  return out;
}

inline Subgroup subgroup_union_closure(const Group& g, const Subgroup& a, const Subgroup& b);

// A small generating set, chosen greedily in index order.
inline std::vector<Elem> generators_of(const Group& g, const Subgroup& h) {
  std::vector<Elem> gens;
  std::vector<char> in(g.order(), 0);
  in[0] = 1;
  std::size_t size = 1;
  for (auto x : h) {
    if (in[x]) continue;
    gens.push_back(x);
    Subgroup c = closure(g, gens);
    for (auto y : c) in[y] = 1;
    size = c.size();
    if (size == h.size()) break;
  }
  return gens;
}

inline bool is_subgroup(const Group& g, const Subgroup& h) {
  if (h.empty() || h[0] != 0) return false;
  for (auto a : h)
    for (auto b : h)
      if (!contains(h, g.mul(a, b))) return false;
  return true;
}

inline Subgroup intersect(const Subgroup& a, const Subgroup& b) {
  Subgroup r;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
  return r;
}

inline bool is_subset(const Subgroup& a, const Subgroup& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

inline Subgroup product(const Group& g, const Subgroup& a, const Subgroup& b) {
  std::vector<Elem> gens = generators_of(g, a);
  auto gb = generators_of(g, b);
  gens.insert(gens.end(), gb.begin(), gb.end());
  return closure(g, gens);
}

// Normal closure of gens in the group generated by ambient.
inline Subgroup normal_closure(const Group& g, const std::vector<Elem>& gens, const std::vector<Elem>& ambient) {
  std::vector<char> in(g.order(), 0);
  std::vector<Elem> cur_gens;
  Subgroup cur = Group::trivial();
  std::deque<Elem> queue(gens.begin(), gens.end());
  in[0] = 1;
  while (!queue.empty()) {
    Elem x = queue.front();
    queue.pop_front();
    if (in[x]) continue;
    cur_gens.push_back(x);
    cur = closure(g, cur_gens);
    for (auto y : cur) in[y] = 1;
    for (auto a : ambient) queue.push_back(g.conj(x, a));
    // conjugates of every new generator are enough for normality
  }
  return cur;
}

inline bool is_normal(const Group& g, const Subgroup& n, const Subgroup& ambient) {
  auto gens = generators_of(g, ambient);
  auto ngens = generators_of(g, n);
  for (auto a : gens)
    for (auto x : ngens)
      if (!contains(n, g.conj(x, a))) return false;
  return true;
}

inline bool is_normal(const Group& g, const Subgroup& n) { return is_normal(g, n, g.whole()); }

inline Subgroup commutator_subgroup(const Group& g, const Subgroup& a, const Subgroup& b) {
  auto ga = generators_of(g, a), gb = generators_of(g, b);
  std::vector<Elem> comms;
  for (auto x : ga)
    for (auto y : gb) comms.push_back(g.comm(x, y));
  std::vector<Elem> amb = ga;
  amb.insert(amb.end(), gb.begin(), gb.end());
  return normal_closure(g, comms, amb);
}

// <a^p : a in A>
inline Subgroup power_subgroup(const Group& g, const Subgroup& a, std::uint64_t p) {
  std::vector<Elem> gens;
  for (auto x : a) gens.push_back(g.pow(x, p));
  std::sort(gens.begin(), gens.end());
  gens.erase(std::unique(gens.begin(), gens.end()), gens.end());
  return closure(g, gens);
}

inline Subgroup center(const Group& g) {
  auto gens = generators_of(g, g.whole());
  Subgroup z;
  for (Elem x = 0; x < g.order(); ++x) {
    bool central = true;
    for (auto s : gens)
      if (g.mul(x, s) != g.mul(s, x)) {
        central = false;
        break;
      }
    if (central) z.push_back(x);
  }
  return z;
}

inline std::vector<Subgroup> lower_central_series(const Group& g) {
  std::vector<Subgroup> s{g.whole()};
  while (true) {
    Subgroup next = commutator_subgroup(g, s.back(), g.whole());
    if (next == s.back()) break;
    s.push_back(std::move(next));
  }
  return s;
}

inline std::vector<Subgroup> derived_series(const Group& g) {
  std::vector<Subgroup> s{g.whole()};
  while (true) {
    Subgroup next = commutator_subgroup(g, s.back(), s.back());
    if (next == s.back()) break;
    s.push_back(std::move(next));
  }
  return s;
}

inline bool is_nilpotent(const Group& g) { return lower_central_series(g).back().size() == 1; }

inline std::vector<std::uint64_t> prime_factors(std::uint64_t n) {
  std::vector<std::uint64_t> ps;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) {
      ps.push_back(d);
      while (n % d == 0) n /= d;
    }
  if (n > 1) ps.push_back(n);
  return ps;
}

inline bool is_power_of(std::uint64_t n, std::uint64_t p) {
  if (n == 0) return false;
  while (n % p == 0) n /= p;
  return n == 1;
}

inline std::uint64_t p_part(std::uint64_t n, std::uint64_t p) {
  std::uint64_t r = 1;
  while (n % p == 0) {
    n /= p;
    r *= p;
  }
  return r;
}

// Greedy single-element extension: any p-subgroup below a Sylow subgroup P
// has a proper normalizer in P, so some element always extends it.
inline Subgroup sylow(const Group& g, std::uint64_t p) {
  const std::uint64_t target = p_part(g.order(), p);
  if (target == g.order()) return g.whole();
  std::vector<Elem> gens;
  Subgroup h = Group::trivial();
  while (h.size() < target) {
    bool grown = false;
    for (Elem x = 1; x < g.order() && !grown; ++x) {
      if (contains(h, x) || !is_power_of(g.elem_order(x), p)) continue;
      gens.push_back(x);
      Subgroup c = closure(g, gens);
      if (is_power_of(c.size(), p)) {
        h = std::move(c);
        grown = true;
      } else {
        gens.pop_back();
      }
    }
    if (!grown) throw Error("sylow: no extending p-element found");
  }
  return h;
}

inline Subgroup conjugate(const Group& g, const Subgroup& h, Elem a) {
  Subgroup r;
  r.reserve(h.size());
  for (auto x : h) r.push_back(g.conj(x, a));
  std::sort(r.begin(), r.end());
  return r;
}

// Largest normal subgroup contained in h.
inline Subgroup core(const Group& g, Subgroup h) {
  auto gens = generators_of(g, g.whole());
  while (true) {
    Subgroup next = h;
    for (auto a : gens) next = intersect(next, conjugate(g, next, a));
    if (next == h) return h;
    h = std::move(next);
  }
}

inline Subgroup p_core(const Group& g, std::uint64_t p) {
  if (g.order() % p != 0) return Group::trivial();
  return core(g, sylow(g, p));
}

inline Subgroup fitting(const Group& g) {
  Subgroup f = Group::trivial();
  for (auto p : prime_factors(g.order())) f = product(g, f, p_core(g, p));
  return f;
}

inline Subgroup socle_nilpotent(const Group& g) {
  if (!is_nilpotent(g)) throw NotNilpotent("socle_nilpotent needs a nilpotent group");
  Subgroup z = center(g), s;
  for (auto x : z) {
    std::uint64_t o = g.elem_order(x);
    bool squarefree = true;
    for (auto p : prime_factors(o))
      if ((o / p) % p == 0) squarefree = false;
    if (squarefree) s.push_back(x);
  }
  return s;
}

// ---------------------------------------------------------------- quotients

struct Quotient {
  Group group;
  std::vector<Elem> proj;     // element of G -> coset index
  std::vector<Elem> rep;      // coset index -> least representative
};

inline Quotient quotient(const Group& g, const Subgroup& n) {
  if (!is_subgroup(g, n) || !is_normal(g, n)) throw NotNormal("quotient by a non-normal subgroup");
  const std::size_t total = g.order();
  std::vector<Elem> proj(total, static_cast<Elem>(-1)), rep;
  for (Elem x = 0; x < total; ++x) {
    if (proj[x] != static_cast<Elem>(-1)) continue;
    Elem id = static_cast<Elem>(rep.size());
    rep.push_back(x);
    for (auto y : n) proj[g.mul(x, y)] = id;
  }
  const std::size_t m = rep.size();
  std::vector<std::uint16_t> t(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) t[i * m + j] = static_cast<std::uint16_t>(proj[g.mul(rep[i], rep[j])]);
  return Quotient{Group(m, std::move(t)), std::move(proj), std::move(rep)};
}

inline Subgroup image(const Quotient& q, const Subgroup& h) {
  Subgroup r;
  for (auto x : h) r.push_back(q.proj[x]);
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  return r;
}

inline Subgroup preimage(const Quotient& q, const Subgroup& h) {
  Subgroup r;
  for (Elem x = 0; x < q.proj.size(); ++x)
    if (contains(h, q.proj[x])) r.push_back(x);
  return r;
}

// ---------------------------------------------------------------- layers

// top/bottom as an F_p vector space.
struct LayerSpace {
  std::uint32_t p = 0;
  std::size_t dim = 0;
  Subgroup top, bottom;
  std::vector<Elem> basis;                 // transversal of a basis
  std::unordered_map<Elem, Vec> code;      // element of top -> coordinates

  Vec vector_of(Elem x) const {
    auto it = code.find(x);
    if (it == code.end()) throw InputError("element is not in the layer's top subgroup");
    return it->second;
  }
  Elem element_of(const Group& g, const Vec& v) const {
    Elem r = 0;
    for (std::size_t i = 0; i < dim; ++i) r = g.mul(r, g.pow(basis[i], v[i]));
    return r;
  }
};

inline LayerSpace layer_space(const Group& g, const Subgroup& top, const Subgroup& bottom) {
  if (!is_subset(bottom, top)) throw NotElementaryAbelian("bottom is not inside top");
  LayerSpace ls;
  ls.top = top;
  ls.bottom = bottom;
  const std::size_t index = top.size() / bottom.size();
  if (index * bottom.size() != top.size()) throw NotElementaryAbelian("index is not an integer");
  if (index == 1) {
    ls.p = 0;
    for (auto x : top) ls.code[x] = Vec{};
    return ls;
  }
  auto ps = prime_factors(index);
  if (ps.size() != 1) throw NotElementaryAbelian("layer order is not a prime power");
  const std::uint32_t p = static_cast<std::uint32_t>(ps[0]);
  ls.p = p;
  if (!is_normal(g, bottom, top)) throw NotElementaryAbelian("bottom not normal in top");
  auto tg = generators_of(g, top);
  for (auto a : tg) {
    if (!contains(bottom, g.pow(a, p))) throw NotElementaryAbelian("layer exponent is not p");
    for (auto b : tg)
      if (!contains(bottom, g.comm(a, b))) throw NotElementaryAbelian("layer is not abelian");
  }
  std::vector<char> in(g.order(), 0);
  for (auto x : bottom) in[x] = 1;
  std::vector<Elem> gens = generators_of(g, bottom);
  for (auto x : top) {
    if (in[x]) continue;
    ls.basis.push_back(x);
    gens.push_back(x);
    for (auto y : closure(g, gens)) in[y] = 1;
  }
  ls.dim = ls.basis.size();
  std::uint64_t count = ipow(p, static_cast<unsigned>(ls.dim));
  for (std::uint64_t c = 0; c < count; ++c) {
    Vec v(ls.dim);
    std::uint64_t cc = c;
    for (std::size_t i = 0; i < ls.dim; ++i) {
      v[i] = static_cast<std::uint32_t>(cc % p);
      cc /= p;
    }
    Elem e = ls.element_of(g, v);
    for (auto b : bottom) ls.code[g.mul(b, e)] = v;
  }
  if (ls.code.size() != top.size()) throw NotElementaryAbelian("layer encoding is not bijective");
  return ls;
}

// gamma_2(H) gamma_3(G) = gamma_2(G), with H given as a subgroup of G.
inline bool is_sims_subgroup(const Group& g, const Subgroup& h) {
  auto lcs = lower_central_series(g);
  Subgroup g2 = lcs.size() > 1 ? lcs[1] : Group::trivial();
  Subgroup g3 = lcs.size() > 2 ? lcs[2] : Group::trivial();
  Subgroup h2 = commutator_subgroup(g, h, h);
  return product(g, h2, g3) == g2;
}

// ---------------------------------------------------------------- matrix groups

struct MatrixGroup {
  std::uint32_t b = 2;
  std::size_t d = 0;
  std::vector<Matrix> gens;
};

inline void check_matrix_group(const MatrixGroup& mg) {
  for (const auto& m : mg.gens) {
    if (m.rows() != mg.d || m.cols() != mg.d || m.modulus() != mg.b) throw ShapeMismatch("generator shape");
  }
}

struct MatrixClosure {
  bool cap_exceeded = false;
  std::vector<Matrix> elements;
};

inline MatrixClosure closure_matrix(const MatrixGroup& mg, std::size_t cap) {
  check_matrix_group(mg);
  MatrixClosure out;
  std::set<Matrix> seen;
  Matrix id = Matrix::identity(mg.d, mg.b);
  seen.insert(id);
  out.elements.push_back(id);
  for (std::size_t i = 0; i < out.elements.size(); ++i)
    for (const auto& s : mg.gens) {
      Matrix y = out.elements[i] * s;
      if (seen.insert(y).second) {
        if (out.elements.size() >= cap) {
          out.cap_exceeded = true;
          out.elements.clear();
          return out;
        }
        out.elements.push_back(std::move(y));
      }
    }
  std::sort(out.elements.begin(), out.elements.end());
  return out;
}

inline Group cayley_of(const MatrixGroup& mg, std::size_t cap = kCayleyCap, std::vector<Matrix>* elements = nullptr) {
  check_matrix_group(mg);
  return group_from_generators(Matrix::identity(mg.d, mg.b), mg.gens,
                               [](const Matrix& a, const Matrix& b) { return a * b; }, cap, elements);
}

inline bool is_unitriangular(const Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j <= i; ++j)
      if (m(i, j) != (i == j ? 1u : 0u)) return false;
  return true;
}

// I + E_{ij}
inline Matrix transvection(std::size_t d, std::uint32_t b, std::size_t i, std::size_t j, std::uint32_t c = 1) {
  Matrix m = Matrix::identity(d, b);
  m(i, j) = c % b;
  return m;
}

// Standard generators of U(d,p): the superdiagonal transvections.
inline MatrixGroup unitriangular_group(std::size_t d, std::uint32_t p) {
  MatrixGroup g{p, d, {}};
  for (std::size_t i = 0; i + 1 < d; ++i) g.gens.push_back(transvection(d, p, i, i + 1));
  return g;
}

inline Matrix unitriangular_inverse(const Matrix& m) {
  auto inv = inverse(m);
  if (!inv) throw NonUnitriangular("matrix not invertible");
  return *inv;
}

namespace detail {

// Sifting data for the congruence filtration U_j = {superdiagonals < j vanish}.
class UnipotentSifter {
 public:
  UnipotentSifter(std::size_t d, std::uint32_t p) : d_(d), p_(p), levels_(d) {}

  // Returns true if g was not already in the group spanned so far.
  bool insert(Matrix g) {
    while (true) {
      std::size_t j = level_of(g);
      if (j >= d_) return false;
      Vec v = level_vector(g, j);
      auto& lv = levels_[j];
      for (const auto& e : lv) {
        std::uint32_t c = v[e.pivot];
        if (c == 0) continue;
        g = g * e.inv_powers[c - 1];
        v = level_vector(g, j);
      }
      bool zero = std::all_of(v.begin(), v.end(), [](std::uint32_t x) { return x == 0; });
      if (zero) continue;
      std::size_t pivot = 0;
      while (v[pivot] == 0) ++pivot;
      // normalize so the pivot coordinate is 1
      std::uint32_t inv = inv_mod(v[pivot], p_);
      Matrix h = g.pow(inv);
      Entry e;
      e.pivot = pivot;
      e.elem = h;
      Matrix hinv = unitriangular_inverse(h);
      Matrix acc = hinv;
      for (std::uint32_t k = 1; k < p_; ++k) {
        e.inv_powers.push_back(acc);
        acc = acc * hinv;
      }
      lv.push_back(std::move(e));
      ++size_;
      return true;
    }
  }

  std::size_t size() const { return size_; }

  std::vector<Matrix> elements() const {
    std::vector<Matrix> out;
    for (const auto& lv : levels_)
      for (const auto& e : lv) out.push_back(e.elem);
    return out;
  }

  // Exponent of p in the order, after saturation.
  std::size_t log_order() const { return size_; }

 private:
  struct Entry {
    std::size_t pivot = 0;
    Matrix elem;
    std::vector<Matrix> inv_powers;  // elem^-1, elem^-2, ..., elem^-(p-1)
  };

  // smallest j >= 1 with a nonzero entry on the j-th superdiagonal; d if identity
  std::size_t level_of(const Matrix& g) const {
    for (std::size_t j = 1; j < d_; ++j)
      for (std::size_t i = 0; i + j < d_; ++i)
        if (g(i, i + j) != 0) return j;
    return d_;
  }

  Vec level_vector(const Matrix& g, std::size_t j) const {
    Vec v(d_ - j);
    for (std::size_t i = 0; i + j < d_; ++i) v[i] = g(i, i + j);
    return v;
  }

  std::size_t d_;
  std::uint32_t p_;
  std::vector<std::vector<Entry>> levels_;
  std::size_t size_ = 0;
};

inline Matrix matrix_comm(const Matrix& a, const Matrix& b) {
  return unitriangular_inverse(a) * unitriangular_inverse(b) * a * b;
}

}  // namespace detail

// Exact order of a unitriangular group over a prime field, as p^k.
// Returns k.
inline std::size_t log_order_unipotent(const MatrixGroup& mg) {
  check_matrix_group(mg);
  require_prime(mg.b);
  for (const auto& m : mg.gens)
    if (!is_unitriangular(m)) throw NonUnitriangular("generator is not upper unitriangular");
  detail::UnipotentSifter sifter(mg.d, mg.b);
  for (const auto& g : mg.gens) sifter.insert(g);
  // Saturate under commutators and p-th powers until a full pass adds nothing.
  while (true) {
    bool grew = false;
    std::vector<Matrix> elems = sifter.elements();
    for (std::size_t i = 0; i < elems.size(); ++i) {
      grew |= sifter.insert(elems[i].pow(mg.b));
      for (std::size_t j = i + 1; j < elems.size(); ++j) grew |= sifter.insert(detail::matrix_comm(elems[i], elems[j]));
    }
    if (!grew) break;
  }
  return sifter.log_order();
}

// |U| as an integer; throws CapExceeded if it does not fit in 64 bits.
inline std::uint64_t order_unipotent(const MatrixGroup& mg) {
  std::size_t k = log_order_unipotent(mg);
  std::uint64_t r = ipow(mg.b, static_cast<unsigned>(k));
  if (r == std::numeric_limits<std::uint64_t>::max()) throw CapExceeded("order exceeds 64 bits");
  return r;
}

// Sims test against U(d,p) for a unitriangular H: the level-2 parts of the
// generator commutators must span all d-2 coordinates of gamma_2(U)/gamma_3(U).
inline bool is_sims_subgroup_unitriangular(const MatrixGroup& h) {
  check_matrix_group(h);
  require_prime(h.b);
  for (const auto& m : h.gens)
    if (!is_unitriangular(m)) throw NonUnitriangular("generator is not upper unitriangular");
  const std::size_t d = h.d;
  if (d < 3) return true;
  std::vector<Vec> rows;
  for (std::size_t i = 0; i < h.gens.size(); ++i)
    for (std::size_t j = i + 1; j < h.gens.size(); ++j) {
      Matrix c = detail::matrix_comm(h.gens[i], h.gens[j]);
      Vec v(d - 2);
      for (std::size_t k = 0; k + 2 < d; ++k) v[k] = c(k, k + 2);
      rows.push_back(v);
    }
  if (rows.empty()) return false;
  return Subspace::span_of(rows, d - 2, h.b).dim() == d - 2;
}

}  // namespace gpiso
