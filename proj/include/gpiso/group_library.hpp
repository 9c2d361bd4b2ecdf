#pragma once

// Small named groups used by tests, the CLI and the acceptance corpus.

#include <cstdint>
#include <string>
#include <vector>

#include "gpiso/groups.hpp"

namespace gpiso::library {

using Perm = std::vector<std::uint32_t>;

inline Group from_permutations(const std::vector<Perm>& gens) {
  if (gens.empty()) return Group(1, {0});
  Perm id(gens[0].size());
  for (std::size_t i = 0; i < id.size(); ++i) id[i] = static_cast<std::uint32_t>(i);
  // (a*b)(x) = b(a(x)): left-to-right composition
  return group_from_generators(id, gens, [](const Perm& a, const Perm& b) {
    Perm r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = b[a[i]];
    return r;
  });
}

// Generic group from integer tuples with a custom law.
template <class Mul>
Group from_tuples(std::size_t len, const std::vector<Vec>& gens, Mul mul, std::size_t cap = kCayleyCap) {
  return group_from_generators(Vec(len, 0), gens, mul, cap);
}

inline Group cyclic(std::uint32_t n) {
  if (n == 1) return Group(1, {0});
  return from_tuples(1, {Vec{1}}, [n](const Vec& a, const Vec& b) { return Vec{(a[0] + b[0]) % n}; });
}

// Abelian group Z_{n1} x ... x Z_{nk}.
inline Group abelian(const std::vector<std::uint32_t>& ns) {
  std::vector<Vec> gens;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    Vec v(ns.size(), 0);
    v[i] = 1;
    if (ns[i] > 1) gens.push_back(v);
  }
  if (gens.empty()) return Group(1, {0});
  return from_tuples(ns.size(), gens, [ns](const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = (a[i] + b[i]) % ns[i];
    return r;
  });
}

inline Group direct_product(const Group& a, const Group& b) {
  const std::size_t na = a.order(), nb = b.order(), n = na * nb;
  if (n > kCayleyCap) throw CapExceeded("direct product too large");
  std::vector<std::uint16_t> t(n * n);
  // element (x,y) has index x*nb + y
  for (std::size_t x1 = 0; x1 < na; ++x1)
    for (std::size_t y1 = 0; y1 < nb; ++y1)
      for (std::size_t x2 = 0; x2 < na; ++x2)
        for (std::size_t y2 = 0; y2 < nb; ++y2)
          t[(x1 * nb + y1) * n + x2 * nb + y2] = static_cast<std::uint16_t>(a.mul(x1, x2) * nb + b.mul(y1, y2));
  return Group(n, std::move(t));
}

inline Group symmetric(std::uint32_t k) {
  Perm cyc(k), sw(k);
  for (std::uint32_t i = 0; i < k; ++i) {
    cyc[i] = (i + 1) % k;
    sw[i] = i;
  }
  if (k >= 2) std::swap(sw[0], sw[1]);
  return from_permutations({cyc, sw});
}

inline Group alternating(std::uint32_t k) {
  std::vector<Perm> gens;
  for (std::uint32_t j = 2; j < k; ++j) {
    Perm c(k);
    for (std::uint32_t i = 0; i < k; ++i) c[i] = i;
    c[0] = 1;
    c[1] = j;
    c[j] = 0;
    gens.push_back(c);
  }
  return from_permutations(gens);
}

// Dihedral group of order 2n.
inline Group dihedral(std::uint32_t n) {
  // (r, f) with r in Z_n, f in {0,1}: (r1,f1)(r2,f2) = (r1 + (-1)^f1 r2, f1+f2)
  return from_tuples(2, {Vec{1, 0}, Vec{0, 1}}, [n](const Vec& a, const Vec& b) {
    std::uint32_t r = a[1] ? (a[0] + n - b[0]) % n : (a[0] + b[0]) % n;
    return Vec{r, (a[1] + b[1]) % 2};
  });
}

// Generalized quaternion group of order 4m (m a power of 2 gives Q_{4m}).
inline Group dicyclic(std::uint32_t m) {
  // elements a^k x^e, k in Z_{2m}, e in {0,1}; x^2 = a^m, x a x^-1 = a^-1
  const std::uint32_t n = 2 * m;
  return from_tuples(2, {Vec{1, 0}, Vec{0, 1}}, [n, m](const Vec& a, const Vec& b) {
    std::uint32_t k = a[1] ? (a[0] + n - b[0]) % n : (a[0] + b[0]) % n;
    std::uint32_t e = a[1] + b[1];
    if (e == 2) {
      k = (k + m) % n;
      e = 0;
    }
    return Vec{k, e};
  });
}

// Heisenberg group of 3x3 unitriangular matrices over Z/p: (a,b,c) with
// (a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab').
inline Group heisenberg(std::uint32_t p) {
  return from_tuples(3, {Vec{1, 0, 0}, Vec{0, 1, 0}}, [p](const Vec& x, const Vec& y) {
    return Vec{(x[0] + y[0]) % p, (x[1] + y[1]) % p, (x[2] + y[2] + x[0] * y[1]) % p};
  });
}

// Extraspecial group of order p^3 and exponent p^2: Z_{p^2} semidirect Z_p.
inline Group extraspecial_exp_p2(std::uint32_t p) {
  const std::uint32_t n = p * p;
  // (k,e)(k',e') = (k + (1+p)^e k', e+e'), acting by a -> a^{1+p}
  return from_tuples(2, {Vec{1, 0}, Vec{0, 1}}, [n, p](const Vec& a, const Vec& b) {
    std::uint64_t f = 1;
    for (std::uint32_t i = 0; i < a[1]; ++i) f = (f * (1 + p)) % n;
    return Vec{static_cast<std::uint32_t>((a[0] + f * b[0]) % n), (a[1] + b[1]) % p};
  });
}

// Modular group M_{2^k}: Z_{2^{k-1}} semidirect Z_2 via a -> a^{1+2^{k-2}}.
inline Group modular(std::uint32_t k) {
  const std::uint32_t n = 1u << (k - 1);
  const std::uint32_t s = 1 + (1u << (k - 2));
  return from_tuples(2, {Vec{1, 0}, Vec{0, 1}}, [n, s](const Vec& a, const Vec& b) {
    std::uint64_t f = a[1] ? s : 1;
    return Vec{static_cast<std::uint32_t>((a[0] + f * b[0]) % n), (a[1] + b[1]) % 2};
  });
}

struct NamedGroup {
  std::string name;
  Group group;
};

// Twenty groups of order <= 64 used for engine cross-checks.
inline std::vector<NamedGroup> corpus20() {
  return {
      {"Z2", cyclic(2)},
      {"Z4", cyclic(4)},
      {"Z2^2", abelian({2, 2})},
      {"Z8", cyclic(8)},
      {"Z4xZ2", abelian({4, 2})},
      {"Z2^3", abelian({2, 2, 2})},
      {"D4", dihedral(4)},
      {"Q8", dicyclic(2)},
      {"Z9", cyclic(9)},
      {"Z3^2", abelian({3, 3})},
      {"Heis27", heisenberg(3)},
      {"Z27", cyclic(27)},
      {"Z9xZ3", abelian({9, 3})},
      {"Z3^3", abelian({3, 3, 3})},
      {"Ext27exp9", extraspecial_exp_p2(3)},
      {"M16", modular(4)},
      {"Z16", cyclic(16)},
      {"D8", dihedral(8)},
      {"Q16", dicyclic(4)},
      {"Z4xZ4", abelian({4, 4})},
  };
}

}  // namespace gpiso::library
