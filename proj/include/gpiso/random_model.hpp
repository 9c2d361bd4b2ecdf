#pragma once

// Random unitriangular groups, Brahana and Baer groups, block structure and
// Morita condensation, order histograms.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "gpiso/bimaps.hpp"
#include "gpiso/error.hpp"
#include "gpiso/groups.hpp"
#include "gpiso/linalg.hpp"

namespace gpiso {

enum class SamplingLaw { Bernoulli, FixedSupport };

struct SamplerConfig {
  std::uint32_t b = 3;
  std::size_t d = 10;
  std::size_t gens = 5;
  SamplingLaw law = SamplingLaw::Bernoulli;
  double density = 0.1;          // Bernoulli
  std::size_t support_size = 0;  // FixedSupport
  std::uint64_t seed = 1;

  void validate() const {
    if (b < 2) throw InputError("modulus must be at least 2");
    if (d < 1) throw InputError("dimension must be positive");
    if (law == SamplingLaw::Bernoulli && (density < 0.0 || density > 1.0)) throw InputError("density must lie in [0,1]");
    if (law == SamplingLaw::FixedSupport && support_size > d * (d - 1) / 2)
      throw InputError("support larger than the strictly upper triangle");
  }
};

// One unitriangular matrix: support above the diagonal, values uniform on Z/b \ {0}.
inline Matrix sample_unitriangular_matrix(const SamplerConfig& cfg, std::mt19937_64& rng) {
  Matrix u = Matrix::identity(cfg.d, cfg.b);
  std::uniform_int_distribution<std::uint32_t> value(1, cfg.b - 1);
  if (cfg.law == SamplingLaw::Bernoulli) {
    std::bernoulli_distribution coin(cfg.density);
    for (std::size_t i = 0; i < cfg.d; ++i)
      for (std::size_t j = i + 1; j < cfg.d; ++j)
        if (coin(rng)) u(i, j) = value(rng);
  } else {
    std::vector<std::pair<std::size_t, std::size_t>> pos;
    for (std::size_t i = 0; i < cfg.d; ++i)
      for (std::size_t j = i + 1; j < cfg.d; ++j) pos.emplace_back(i, j);
    std::shuffle(pos.begin(), pos.end(), rng);
    for (std::size_t k = 0; k < cfg.support_size; ++k) u(pos[k].first, pos[k].second) = value(rng);
  }
  return u;
}

inline MatrixGroup sample_unitriangular(const SamplerConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  MatrixGroup g{cfg.b, cfg.d, {}};
  for (std::size_t i = 0; i < cfg.gens; ++i) g.gens.push_back(sample_unitriangular_matrix(cfg, rng));
  return g;
}

inline MatrixGroup sample_unitriangular(const SamplerConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  return sample_unitriangular(cfg, rng);
}

// `count` samples from a single stream seeded by cfg.seed.
inline std::vector<MatrixGroup> sample_many(const SamplerConfig& cfg, std::size_t count) {
  std::mt19937_64 rng(cfg.seed);
  std::vector<MatrixGroup> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample_unitriangular(cfg, rng));
  return out;
}

// log_b |<u_1..u_l>| -> number of samples.
inline std::map<std::size_t, std::size_t> order_histogram(const SamplerConfig& cfg, std::size_t samples) {
  require_prime(cfg.b);
  std::map<std::size_t, std::size_t> hist;
  for (const auto& g : sample_many(cfg, samples)) ++hist[log_order_unipotent(g)];
  return hist;
}

// ---------------------------------------------------------------- Brahana / Baer

namespace detail {

inline Vec digits(std::size_t x, std::size_t len, std::uint32_t q) {
  Vec v(len);
  for (std::size_t i = 0; i < len; ++i) {
    v[i] = static_cast<std::uint32_t>(x % q);
    x /= q;
  }
  return v;
}

inline std::size_t undigits(const Vec& v, std::uint32_t q) {
  std::size_t x = 0;
  for (std::size_t i = v.size(); i-- > 0;) x = x * q + v[i];
  return x;
}

// u * v as a vector of W
inline Vec apply_bimap(const MatrixTuple& t, const Vec& u, const Vec& v) {
  Vec w(t.m(), 0);
  for (std::size_t k = 0; k < t.m(); ++k) {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < t.n; ++i) {
      if (!u[i]) continue;
      std::uint64_t inner = 0;
      for (std::size_t j = 0; j < t.n2; ++j) inner += static_cast<std::uint64_t>(t.mats[k](i, j)) * v[j];
      s += (inner % t.q) * u[i];
    }
    w[k] = static_cast<std::uint32_t>(s % t.q);
  }
  return w;
}

}  // namespace detail

// Bh(*): (u,v,w)(u',v',w') = (u+u', v+v', w+w'+u*v').
inline Group brahana_group(const MatrixTuple& t, std::size_t cap = kCayleyCap) {
  require_prime(t.q);
  const std::uint32_t q = t.q;
  const std::uint64_t nu = ipow(q, static_cast<unsigned>(t.n)), nv = ipow(q, static_cast<unsigned>(t.n2)),
                      nw = ipow(q, static_cast<unsigned>(t.m()));
  const std::uint64_t n = nu * nv * nw;
  if (n > cap || n > 65535) throw CapExceeded("Brahana group of order " + std::to_string(n) + " exceeds cap");
  // u*v for all pairs, as an index into W
  std::vector<std::uint32_t> prod(nu * nv);
  for (std::size_t a = 0; a < nu; ++a)
    for (std::size_t b = 0; b < nv; ++b)
      prod[a * nv + b] = static_cast<std::uint32_t>(
          detail::undigits(detail::apply_bimap(t, detail::digits(a, t.n, q), detail::digits(b, t.n2, q)), q));
  std::vector<Vec> ud(nu), vd(nv), wd(nw);
  for (std::size_t a = 0; a < nu; ++a) ud[a] = detail::digits(a, t.n, q);
  for (std::size_t a = 0; a < nv; ++a) vd[a] = detail::digits(a, t.n2, q);
  for (std::size_t a = 0; a < nw; ++a) wd[a] = detail::digits(a, t.m(), q);
  auto add = [&](const Vec& x, const Vec& y) {
    Vec r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = (x[i] + y[i]) % q;
    return detail::undigits(r, q);
  };
  // additive tables for each component
  std::vector<std::uint32_t> addu(nu * nu), addv(nv * nv), addw(nw * nw);
  for (std::size_t a = 0; a < nu; ++a)
    for (std::size_t b = 0; b < nu; ++b) addu[a * nu + b] = static_cast<std::uint32_t>(add(ud[a], ud[b]));
  for (std::size_t a = 0; a < nv; ++a)
    for (std::size_t b = 0; b < nv; ++b) addv[a * nv + b] = static_cast<std::uint32_t>(add(vd[a], vd[b]));
  for (std::size_t a = 0; a < nw; ++a)
    for (std::size_t b = 0; b < nw; ++b) addw[a * nw + b] = static_cast<std::uint32_t>(add(wd[a], wd[b]));
  // element index = (w * nv + v) * nu + u
  std::vector<std::uint16_t> table(n * n);
  for (std::size_t x = 0; x < n; ++x) {
    const std::size_t u1 = x % nu, v1 = (x / nu) % nv, w1 = x / (nu * nv);
    for (std::size_t y = 0; y < n; ++y) {
      const std::size_t u2 = y % nu, v2 = (y / nu) % nv, w2 = y / (nu * nv);
      const std::size_t w = addw[addw[w1 * nw + w2] * nw + prod[u1 * nv + v2]];
      table[x * n + y] = static_cast<std::uint16_t>((w * nv + addv[v1 * nv + v2]) * nu + addu[u1 * nu + u2]);
    }
  }
  return Group(n, std::move(table));
}

// Br(*) on U x W: (u,w)(u',w') = (u+u', w+w'+u*u'), * alternating.
inline Group baer_group(const MatrixTuple& t, std::size_t cap = kCayleyCap) {
  require_alternating(t);
  require_prime(t.q);
  const std::uint32_t q = t.q;
  const std::uint64_t nu = ipow(q, static_cast<unsigned>(t.n)), nw = ipow(q, static_cast<unsigned>(t.m()));
  const std::uint64_t n = nu * nw;
  if (n > cap || n > 65535) throw CapExceeded("Baer group of order " + std::to_string(n) + " exceeds cap");
  std::vector<Vec> ud(nu), wd(nw);
  for (std::size_t a = 0; a < nu; ++a) ud[a] = detail::digits(a, t.n, q);
  for (std::size_t a = 0; a < nw; ++a) wd[a] = detail::digits(a, t.m(), q);
  std::vector<std::uint32_t> prod(nu * nu), addu(nu * nu), addw(nw * nw);
  auto add = [&](const Vec& x, const Vec& y) {
    Vec r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = (x[i] + y[i]) % q;
    return static_cast<std::uint32_t>(detail::undigits(r, q));
  };
  for (std::size_t a = 0; a < nu; ++a)
    for (std::size_t b = 0; b < nu; ++b) {
      prod[a * nu + b] = static_cast<std::uint32_t>(detail::undigits(detail::apply_bimap(t, ud[a], ud[b]), q));
      addu[a * nu + b] = add(ud[a], ud[b]);
    }
  for (std::size_t a = 0; a < nw; ++a)
    for (std::size_t b = 0; b < nw; ++b) addw[a * nw + b] = add(wd[a], wd[b]);
  // element index = w * nu + u
  std::vector<std::uint16_t> table(n * n);
  for (std::size_t x = 0; x < n; ++x) {
    const std::size_t u1 = x % nu, w1 = x / nu;
    for (std::size_t y = 0; y < n; ++y) {
      const std::size_t u2 = y % nu, w2 = y / nu;
      const std::size_t w = addw[addw[w1 * nw + w2] * nw + prod[u1 * nu + u2]];
      table[x * n + y] = static_cast<std::uint16_t>(w * nu + addu[u1 * nu + u2]);
    }
  }
  return Group(n, std::move(table));
}

// ---------------------------------------------------------------- blocks

struct BlockStructure {
  std::vector<std::size_t> sizes;

  std::size_t total() const {
    std::size_t s = 0;
    for (auto x : sizes) s += x;
    return s;
  }
  std::vector<std::size_t> starts() const {
    std::vector<std::size_t> out;
    std::size_t s = 0;
    for (auto x : sizes) {
      out.push_back(s);
      s += x;
    }
    return out;
  }
  bool operator==(const BlockStructure&) const = default;
};

// Coarsest consecutive partition with identity diagonal blocks for every
// generator: a block ends where some generator has a nonzero entry (i,j)
// with i inside the block and j the next index.
inline BlockStructure block_structure_of(const MatrixGroup& u) {
  for (const auto& g : u.gens)
    if (!is_unitriangular(g)) throw NonUnitriangular("block structure needs unitriangular generators");
  BlockStructure bs;
  std::size_t start = 0;
  for (std::size_t j = 1; j <= u.d; ++j) {
    bool cut = j == u.d;
    for (const auto& g : u.gens)
      for (std::size_t i = start; i < j && !cut; ++i)
        if (g(i, j) != 0) cut = true;
    if (cut) {
      bs.sizes.push_back(j - start);
      start = j;
    }
  }
  return bs;
}

// Marker index of each block; defaults to the first index of the block.
inline std::vector<std::size_t> default_markers(const BlockStructure& bs) { return bs.starts(); }

// e u e with one marker per block, zero rows/columns removed.
inline MatrixGroup morita_condense(const MatrixGroup& u, const BlockStructure& bs, std::vector<std::size_t> markers = {}) {
  if (bs.total() != u.d || std::any_of(bs.sizes.begin(), bs.sizes.end(), [](std::size_t s) { return s == 0; }))
    throw BlockMismatch("block sizes must be positive and sum to d");
  if (markers.empty()) markers = default_markers(bs);
  if (markers.size() != bs.sizes.size()) throw BlockMismatch("one marker per block");
  auto starts = bs.starts();
  for (std::size_t s = 0; s < markers.size(); ++s)
    if (markers[s] < starts[s] || markers[s] >= starts[s] + bs.sizes[s]) throw BlockMismatch("marker outside its block");
  // generators must be block upper unitriangular
  for (const auto& g : u.gens)
    for (std::size_t s = 0; s < bs.sizes.size(); ++s)
      for (std::size_t i = starts[s]; i < starts[s] + bs.sizes[s]; ++i)
        for (std::size_t j = 0; j < u.d; ++j) {
          const bool below = j < starts[s];
          const bool diag = j >= starts[s] && j < starts[s] + bs.sizes[s];
          const std::uint32_t want = i == j ? 1 : 0;
          if ((below || diag) && g(i, j) != want) throw BlockMismatch("generator is not block upper unitriangular");
        }
  const std::size_t l = markers.size();
  MatrixGroup out{u.b, l, {}};
  for (const auto& g : u.gens) {
    Matrix c(l, l, u.b);
    for (std::size_t a = 0; a < l; ++a)
      for (std::size_t b = 0; b < l; ++b) c(a, b) = g(markers[a], markers[b]);
    out.gens.push_back(std::move(c));
  }
  return out;
}

}  // namespace gpiso
