#pragma once

// Average-case pseudo-isometry of alternating tuples: the autometry-based
// search (first algorithm), the adjoint-based search with segment slicing
// (second algorithm), and the low-rank prefilter.
//
// Convention: T is a pseudo-isometry from G to H when span(T^t G T) = span(H).

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "gpiso/bimaps.hpp"
#include "gpiso/error.hpp"
#include "gpiso/linalg.hpp"

namespace gpiso {

enum class PisomMode { Autometry, Adjoint };
enum class PisomHeuristic { None, LowRank };

struct PisomConfig {
  std::size_t c = 3;
  std::uint64_t s = 0;  // 0 means q^n
  PisomHeuristic heuristics = PisomHeuristic::None;
  PisomMode mode = PisomMode::Adjoint;
  std::uint64_t cap = 100'000'000;  // bound on enumerated B tuples
};

enum class PisomOutcome { GenericFail, Decided };

struct PisomResult {
  PisomOutcome outcome = PisomOutcome::GenericFail;
  std::vector<Matrix> pseudo_isometries;  // sorted, complete when Decided
  std::size_t segment = 0;                // 1-based segment that met the bound (0: low-rank tuple)
  std::uint64_t tuples_enumerated = 0;
  bool decided() const { return outcome == PisomOutcome::Decided; }
};

namespace detail {

inline std::uint64_t bound_of(const PisomConfig& cfg, std::size_t n, std::uint32_t q) {
  return cfg.s ? cfg.s : ipow(q, static_cast<unsigned>(n));
}

// q^dim <= s, without materializing q^dim.
inline bool within(std::uint32_t q, std::size_t dim, std::uint64_t s) {
  return ipow(q, static_cast<unsigned>(dim)) <= s;
}

inline void check_inputs(const MatrixTuple& g, const MatrixTuple& h, const PisomConfig& cfg) {
  if (g.n != h.n || g.n2 != h.n2 || g.q != h.q || g.m() != h.m() || g.n != g.n2)
    throw ShapeMismatch("pseudo-isometry needs tuples of the same shape");
  require_alternating(g);
  require_alternating(h);
  if (cfg.c < 1) throw InputError("c must be at least 1");
  if (cfg.s == 0 && g.q < 2) throw InputError("bad field");
}

inline std::vector<Matrix> span_elements(const MatrixTuple& t, std::uint64_t cap) {
  Subspace sp = tuple_span(t);
  std::vector<Matrix> out;
  std::vector<Vec> basis;
  for (std::size_t i = 0; i < sp.dim(); ++i) basis.push_back(sp.basis().row(i));
  for_each_in_span(basis, t.n * t.n2, t.q, [&](const Vec& v) {
    out.push_back(unflatten(v, t.n, t.n2, t.q));
    return true;
  }, cap);
  return out;
}

// Calls f on every c-tuple drawn from pools[0] x ... x pools[c-1].
inline void for_each_tuple(const std::vector<const std::vector<Matrix>*>& pools, std::uint64_t cap,
                           std::uint64_t* count, const std::function<void(const std::vector<Matrix>&)>& f) {
  std::uint64_t total = 1;
  for (auto* p : pools) {
    if (p->empty()) return;
    if (total > cap / p->size()) throw CapExceeded("too many target tuples to enumerate");
    total *= p->size();
  }
  std::vector<std::size_t> idx(pools.size(), 0);
  std::vector<Matrix> cur;
  for (auto* p : pools) cur.push_back((*p)[0]);
  for (std::uint64_t k = 0; k < total; ++k) {
    ++*count;
    f(cur);
    for (std::size_t i = pools.size(); i-- > 0;) {
      idx[i] = (idx[i] + 1) % pools[i]->size();
      cur[i] = (*pools[i])[idx[i]];
      if (idx[i] != 0) break;
    }
  }
}

}  // namespace detail

// ---------------------------------------------------------------- low rank

struct LowRankSets {
  std::vector<Matrix> g_low;     // rank-deficient nonzero matrices of span(G), enumeration order
  std::vector<Matrix> h_low;     // rank-deficient matrices of span(H), including 0
  std::size_t h_low_points = 0;  // projective points among h_low
};

inline LowRankSets low_rank_prefilter(const MatrixTuple& g, const MatrixTuple& h, std::uint64_t cap = 10'000'000) {
  LowRankSets r;
  for (auto& m : detail::span_elements(g, cap))
    if (!m.is_zero() && rank(m) < g.n) r.g_low.push_back(std::move(m));
  for (auto& m : detail::span_elements(h, cap))
    if (rank(m) < h.n) {
      if (!m.is_zero()) {
        Vec v = m.data();
        Vec w = v;
        normalize_projective(w, h.q);
        if (v == w) ++r.h_low_points;
      }
      r.h_low.push_back(std::move(m));
    }
  return r;
}

// ---------------------------------------------------------------- search core

namespace detail {

// Candidate A tuples with pools for B: segments of G, or c independent
// low-rank matrices of span(G) matched against equal-rank members of span(H).
struct Plan {
  std::vector<MatrixTuple> segments;
  std::vector<std::vector<Matrix>> pools;  // per slot, only for low-rank
  bool low_rank = false;
};

inline Plan make_plan(const MatrixTuple& g, const MatrixTuple& h, const PisomConfig& cfg) {
  Plan p;
  const std::size_t c = cfg.c;
  if (cfg.heuristics == PisomHeuristic::LowRank) {
    LowRankSets lr = low_rank_prefilter(g, h, cfg.cap);
    std::vector<Matrix> chosen;
    std::vector<Vec> flat;
    for (const auto& m : lr.g_low) {
      if (chosen.size() == c) break;
      auto trial = flat;
      trial.push_back(m.data());
      if (Subspace::span_of(trial, g.n * g.n, g.q).dim() == trial.size()) {
        flat = std::move(trial);
        chosen.push_back(m);
      }
    }
    if (chosen.size() == c) {
      p.low_rank = true;
      p.segments.push_back(tuple_of(chosen, g.n, g.n, g.q));
      for (const auto& a : chosen) {
        std::vector<Matrix> pool;
        const std::size_t ra = rank(a);
        for (const auto& b : lr.h_low)
          if (rank(b) == ra) pool.push_back(b);
        p.pools.push_back(std::move(pool));
      }
      return p;
    }
    // too few low-rank matrices: plain segments
  }
  for (std::size_t i = 0; i + c <= g.m(); i += c) {
    std::vector<Matrix> seg(g.mats.begin() + i, g.mats.begin() + i + c);
    p.segments.push_back(tuple_of(seg, g.n, g.n, g.q));
  }
  return p;
}

inline bool span_matches(const MatrixTuple& g, const Matrix& t, const Subspace& sh) {
  return tuple_span(transform(g, t)) == sh;
}

}  // namespace detail

// First algorithm: A with a small autometry group, then isometry cosets from A
// to every B in span(H)^c, each isometry tested on the whole span.
inline PisomResult algo_first_average(const MatrixTuple& g, const MatrixTuple& h, const PisomConfig& cfg = {}) {
  detail::check_inputs(g, h, cfg);
  if (cfg.mode == PisomMode::Autometry && g.q % 2 == 0) throw InputError("autometry mode needs odd q");
  PisomResult res;
  const std::uint64_t s = detail::bound_of(cfg, g.n, g.q);
  auto plan = detail::make_plan(g, h, cfg);
  if (plan.segments.empty()) return res;
  // only the first c matrices (or the low-rank tuple) are used
  const MatrixTuple& a = plan.segments.front();
  try {
    autometry_group(a, s);
  } catch (const CapExceeded&) {
    return res;  // |Aut(A)| > s
  }
  res.outcome = PisomOutcome::Decided;
  res.segment = plan.low_rank ? 0 : 1;
  const std::size_t adj_dim = adjoint_algebra(a).dim();
  const Subspace sh = tuple_span(h);
  if (tuple_span(g).dim() != sh.dim()) return res;
  std::vector<Matrix> span_h;
  std::vector<const std::vector<Matrix>*> pools;
  if (plan.low_rank) {
    for (const auto& p : plan.pools) pools.push_back(&p);
  } else {
    span_h = detail::span_elements(h, cfg.cap);
    pools.assign(cfg.c, &span_h);
  }
  detail::for_each_tuple(pools, cfg.cap, &res.tuples_enumerated, [&](const std::vector<Matrix>& bs) {
    MatrixTuple b = tuple_of(bs, g.n, g.n, g.q);
    // isometric tuples have adjoint spaces of equal dimension
    AdjointBasis adj = adjoint_space(a, b);
    if (adj.dim() != adj_dim) return;
    for (const auto& t : isometries_adjoint(a, b, cfg.cap))
      if (detail::span_matches(g, t, sh)) res.pseudo_isometries.push_back(t);
  });
  std::sort(res.pseudo_isometries.begin(), res.pseudo_isometries.end());
  return res;
}

// Steps 1-3 of the second algorithm: the 1-based index of the first segment
// with |Adj(A)| <= s, or 0 when G fails the generic condition.
inline std::size_t generic_segment(const MatrixTuple& g, const PisomConfig& cfg = {}) {
  const std::uint64_t s = detail::bound_of(cfg, g.n, g.q);
  for (std::size_t i = 0; i + cfg.c <= g.m(); i += cfg.c) {
    std::vector<Matrix> seg(g.mats.begin() + i, g.mats.begin() + i + cfg.c);
    if (detail::within(g.q, adjoint_algebra(tuple_of(seg, g.n, g.n, g.q)).dim(), s)) return i / cfg.c + 1;
  }
  return 0;
}

// Second algorithm: the first segment with |Adj(A)| <= s, then the adjoint
// spaces Adj(A,B) for B in span(H)^c, keeping pairs (X,D) with X = D^{-t}.
inline PisomResult algo_second_average(const MatrixTuple& g, const MatrixTuple& h, const PisomConfig& cfg = {}) {
  detail::check_inputs(g, h, cfg);
  PisomResult res;
  const std::uint64_t s = detail::bound_of(cfg, g.n, g.q);
  auto plan = detail::make_plan(g, h, cfg);
  const MatrixTuple* a = nullptr;
  for (std::size_t i = 0; i < plan.segments.size(); ++i)
    if (detail::within(g.q, adjoint_algebra(plan.segments[i]).dim(), s)) {
      a = &plan.segments[i];
      res.segment = plan.low_rank ? 0 : i + 1;
      break;
    }
  if (!a) return res;
  res.outcome = PisomOutcome::Decided;
  const Subspace sh = tuple_span(h);
  if (tuple_span(g).dim() != sh.dim()) return res;
  std::vector<Matrix> span_h;
  std::vector<const std::vector<Matrix>*> pools;
  if (plan.low_rank) {
    for (const auto& p : plan.pools) pools.push_back(&p);
  } else {
    span_h = detail::span_elements(h, cfg.cap);
    pools.assign(cfg.c, &span_h);
  }
  const std::size_t n = g.n;
  detail::for_each_tuple(pools, cfg.cap, &res.tuples_enumerated, [&](const std::vector<Matrix>& bs) {
    MatrixTuple b = tuple_of(bs, n, n, g.q);
    AdjointBasis adj = adjoint_space(*a, b);
    if (!detail::within(g.q, adj.dim(), s)) return;
    for_each_in_span(adjoint_vectors(adj), 2 * n * n, g.q, [&](const Vec& v) {
      auto [x, d] = split_adjoint_vector(v, n, n, g.q);
      auto t = inverse(d);  // X = T^t, D = T^{-1}
      if (t && t->transpose() == x && detail::span_matches(g, *t, sh)) res.pseudo_isometries.push_back(*t);
      return true;
    });
  });
  std::sort(res.pseudo_isometries.begin(), res.pseudo_isometries.end());
  return res;
}

inline PisomResult pseudo_isometries(const MatrixTuple& g, const MatrixTuple& h, const PisomConfig& cfg = {}) {
  return cfg.mode == PisomMode::Autometry ? algo_first_average(g, h, cfg) : algo_second_average(g, h, cfg);
}

}  // namespace gpiso
