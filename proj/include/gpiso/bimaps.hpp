#pragma once

// Bilinear maps as matrix tuples over F_q: x^t G_k y is the k-th coordinate.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gpiso/error.hpp"
#include "gpiso/linalg.hpp"

namespace gpiso {

inline constexpr std::uint64_t kBruteCap = 100'000'000;

struct MatrixTuple {
  std::size_t n = 0, n2 = 0;
  std::uint32_t q = 2;
  std::vector<Matrix> mats;
  bool alternating = false;

  std::size_t m() const { return mats.size(); }

  friend bool operator==(const MatrixTuple& a, const MatrixTuple& b) {
    return a.n == b.n && a.n2 == b.n2 && a.q == b.q && a.mats == b.mats && a.alternating == b.alternating;
  }
};

// v^t G v = 0 for all v: zero diagonal and G + G^t = 0.
inline bool is_alternating_matrix(const Matrix& g) {
  if (!g.is_square()) return false;
  const std::uint32_t q = g.modulus();
  for (std::size_t i = 0; i < g.rows(); ++i) {
    if (g(i, i) != 0) return false;
    for (std::size_t j = i + 1; j < g.cols(); ++j)
      if ((g(i, j) + g(j, i)) % q != 0) return false;
  }
  return true;
}

inline MatrixTuple tuple_of(std::vector<Matrix> mats, std::size_t n = 0, std::size_t n2 = 0, std::uint32_t q = 0) {
  MatrixTuple t;
  if (!mats.empty()) {
    n = mats[0].rows();
    n2 = mats[0].cols();
    q = mats[0].modulus();
  }
  if (q == 0) throw InputError("tuple needs a modulus");
  require_prime(q);
  for (const auto& g : mats)
    if (g.rows() != n || g.cols() != n2 || g.modulus() != q) throw ShapeMismatch("tuple matrices differ in shape");
  t.n = n;
  t.n2 = n2;
  t.q = q;
  t.mats = std::move(mats);
  t.alternating = n == n2 && std::all_of(t.mats.begin(), t.mats.end(), is_alternating_matrix);
  return t;
}

inline void require_alternating(const MatrixTuple& t) {
  if (t.n != t.n2 || !std::all_of(t.mats.begin(), t.mats.end(), is_alternating_matrix))
    throw NotAlternating("tuple is not alternating");
}

inline void require_same_shape(const MatrixTuple& a, const MatrixTuple& b) {
  if (a.n != b.n || a.n2 != b.n2 || a.q != b.q || a.m() != b.m()) throw ShapeMismatch("tuple shapes differ");
}

// T^t G_i S for every i.
inline MatrixTuple transform(const MatrixTuple& g, const Matrix& t, const Matrix& s) {
  std::vector<Matrix> out;
  Matrix tt = t.transpose();
  for (const auto& a : g.mats) out.push_back(tt * a * s);
  return tuple_of(std::move(out), t.cols(), s.cols(), g.q);
}

inline MatrixTuple transform(const MatrixTuple& g, const Matrix& t) { return transform(g, t, t); }

// H_j = sum_i R(j,i) G_i
inline MatrixTuple recombine(const MatrixTuple& g, const Matrix& r) {
  std::vector<Matrix> out;
  for (std::size_t j = 0; j < r.rows(); ++j) {
    Matrix h(g.n, g.n2, g.q);
    for (std::size_t i = 0; i < g.m(); ++i) h.add_scaled(g.mats[i], r(j, i));
    out.push_back(std::move(h));
  }
  return tuple_of(std::move(out), g.n, g.n2, g.q);
}

inline Matrix pencil(const MatrixTuple& g, const Vec& v) {
  Matrix h(g.n, g.n2, g.q);
  for (std::size_t i = 0; i < g.m(); ++i) h.add_scaled(g.mats[i], v[i]);
  return h;
}

inline Subspace tuple_span(const MatrixTuple& g) { return matrix_span(g.mats, g.n, g.n2, g.q); }

inline Matrix random_matrix(std::size_t r, std::size_t c, std::uint32_t q, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint32_t> pick(0, q - 1);
  Matrix m(r, c, q);
  for (auto& x : m.data()) x = pick(rng);
  return m;
}

inline Matrix random_alternating(std::size_t n, std::uint32_t q, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint32_t> pick(0, q - 1);
  Matrix m(n, n, q);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      m(i, j) = pick(rng);
      m(j, i) = (q - m(i, j)) % q;
    }
  return m;
}

inline Matrix random_invertible(std::size_t n, std::uint32_t q, std::mt19937_64& rng) {
  while (true) {
    Matrix m = random_matrix(n, n, q, rng);
    if (is_invertible(m)) return m;
  }
}

inline MatrixTuple random_alternating_tuple(std::size_t n, std::size_t m, std::uint32_t q, std::mt19937_64& rng) {
  std::vector<Matrix> ms;
  for (std::size_t i = 0; i < m; ++i) ms.push_back(random_alternating(n, q, rng));
  return tuple_of(std::move(ms), n, n, q);
}

inline MatrixTuple random_tuple(std::size_t n, std::size_t n2, std::size_t m, std::uint32_t q, std::mt19937_64& rng) {
  std::vector<Matrix> ms;
  for (std::size_t i = 0; i < m; ++i) ms.push_back(random_matrix(n, n2, q, rng));
  return tuple_of(std::move(ms), n, n2, q);
}

inline MatrixTuple zero_tuple(std::size_t n, std::size_t m, std::uint32_t q) {
  return tuple_of(std::vector<Matrix>(m, Matrix(n, n, q)), n, n, q);
}

// The standard symplectic form on F_q^{2k}.
inline Matrix symplectic(std::size_t k, std::uint32_t q) {
  Matrix j(2 * k, 2 * k, q);
  for (std::size_t i = 0; i < k; ++i) {
    j(2 * i, 2 * i + 1) = 1;
    j(2 * i + 1, 2 * i) = q - 1;
  }
  return j;
}

// The three alternating 4x4 matrices over F_3 of the worked example.
inline MatrixTuple worked_example_tuple() {
  auto a1 = Matrix::from_rows({{0, 1, 0, 0}, {-1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, -1, 0}}, 3);
  auto a2 = Matrix::from_rows({{0, 0, 0, 0}, {0, 0, 1, 0}, {0, -1, 0, 0}, {0, 0, 0, 0}}, 3);
  auto a3 = Matrix::from_rows({{0, 0, 0, 1}, {0, 0, 0, 0}, {0, 0, 0, 0}, {-1, 0, 0, 0}}, 3);
  return tuple_of({a1, a2, a3});
}

// ---------------------------------------------------------------- spans

// Calls f on every element of the span of basis (as flat vectors), in
// lexicographic order of coefficient vectors. f returns false to stop.
inline void for_each_in_span(const std::vector<Vec>& basis, std::size_t len, std::uint32_t q,
                             const std::function<bool(const Vec&)>& f, std::uint64_t cap = kBruteCap) {
  const std::size_t d = basis.size();
  std::uint64_t total = ipow(q, static_cast<unsigned>(d));
  if (total > cap) throw CapExceeded("span of dimension " + std::to_string(d) + " exceeds cap");
  Vec coeff(d, 0), v(len, 0);
  for (std::uint64_t c = 0; c < total; ++c) {
    if (!f(v)) return;
    // increment the last coefficient fastest
    std::size_t i = d;
    while (i > 0) {
      --i;
      coeff[i] = (coeff[i] + 1) % q;
      for (std::size_t j = 0; j < len; ++j) v[j] = (v[j] + basis[i][j]) % q;
      if (coeff[i] != 0) break;
    }
  }
}

// ---------------------------------------------------------------- adjoints

struct AdjointBasis {
  std::size_t n = 0, n2 = 0;
  std::uint32_t q = 2;
  std::vector<std::pair<Matrix, Matrix>> basis;
  std::size_t dim() const { return basis.size(); }
};

// Coefficient matrix of {A G_i = H_i D}; unknowns are A (n x n, row-major)
// followed by D (n2 x n2, row-major).
inline Matrix adjoint_system(const MatrixTuple& g, const MatrixTuple& h) {
  require_same_shape(g, h);
  const std::size_t n = g.n, n2 = g.n2, q = g.q;
  const std::size_t unknowns = n * n + n2 * n2;
  Matrix sys(g.m() * n * n2, unknowns, g.q);
  std::size_t row = 0;
  for (std::size_t i = 0; i < g.m(); ++i)
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n2; ++c, ++row) {
        for (std::size_t k = 0; k < n; ++k) sys(row, r * n + k) = g.mats[i](k, c);
        for (std::size_t k = 0; k < n2; ++k)
          sys(row, n * n + k * n2 + c) = static_cast<std::uint32_t>((q - h.mats[i](r, k)) % q);
      }
  return sys;
}

inline std::pair<Matrix, Matrix> split_adjoint_vector(const Vec& v, std::size_t n, std::size_t n2, std::uint32_t q) {
  Matrix a(n, n, q), d(n2, n2, q);
  for (std::size_t i = 0; i < n * n; ++i) a.data()[i] = v[i];
  for (std::size_t i = 0; i < n2 * n2; ++i) d.data()[i] = v[n * n + i];
  return {a, d};
}

inline AdjointBasis adjoint_basis_from_system(const Matrix& sys, std::size_t n, std::size_t n2, std::uint32_t q) {
  AdjointBasis out{n, n2, q, {}};
  Subspace ns = nullspace(sys);
  for (std::size_t i = 0; i < ns.dim(); ++i) out.basis.push_back(split_adjoint_vector(ns.basis().row(i), n, n2, q));
  return out;
}

inline AdjointBasis adjoint_space(const MatrixTuple& g, const MatrixTuple& h) {
  if (g.m() == 0) {
    // no constraints
    Matrix sys(0, g.n * g.n + g.n2 * g.n2, g.q);
    return adjoint_basis_from_system(sys, g.n, g.n2, g.q);
  }
  return adjoint_basis_from_system(adjoint_system(g, h), g.n, g.n2, g.q);
}

inline AdjointBasis adjoint_algebra(const MatrixTuple& g) { return adjoint_space(g, g); }

inline std::vector<Vec> adjoint_vectors(const AdjointBasis& b) {
  std::vector<Vec> out;
  for (const auto& [a, d] : b.basis) {
    Vec v = a.data();
    v.insert(v.end(), d.data().begin(), d.data().end());
    out.push_back(std::move(v));
  }
  return out;
}

// ---------------------------------------------------------------- GL search

// Column-by-column enumeration of GL(n,q). accept(T, k) sees the first k
// columns (rest zero) and returns false to prune. visit returns false to stop.
// With normalize_first, the first nonzero entry of column 0 is 1.
struct GLSearch {
  std::size_t n = 0;
  std::uint32_t q = 2;
  bool normalize_first = false;
  std::function<bool(const Matrix&, std::size_t)> accept;
  std::function<bool(const Matrix&)> visit;
};

namespace detail {

inline bool gl_recurse(const GLSearch& s, Matrix& t, std::size_t k, const std::vector<Vec>& all) {
  if (k == s.n) return s.visit(t);
  std::vector<Vec> prev;
  for (std::size_t j = 0; j < k; ++j) prev.push_back(t.col(j));
  Subspace span = Subspace::span_of(prev, s.n, s.q);
  for (const auto& v : all) {
    if (k == 0 && s.normalize_first) {
      std::size_t f = 0;
      while (f < v.size() && v[f] == 0) ++f;
      if (f == v.size() || v[f] != 1) continue;
    }
    if (span.contains(v)) continue;
    for (std::size_t i = 0; i < s.n; ++i) t(i, k) = v[i];
    if (!s.accept || s.accept(t, k + 1)) {
      if (!gl_recurse(s, t, k + 1, all)) return false;
    }
  }
  for (std::size_t i = 0; i < s.n; ++i) t(i, k) = 0;
  return true;
}

}  // namespace detail

inline void gl_backtrack(const GLSearch& s) {
  std::vector<Vec> all;
  std::uint64_t total = ipow(s.q, static_cast<unsigned>(s.n));
  for (std::uint64_t c = 1; c < total; ++c) {
    Vec v(s.n);
    std::uint64_t x = c;
    for (std::size_t i = s.n; i-- > 0;) {
      v[i] = static_cast<std::uint32_t>(x % s.q);
      x /= s.q;
    }
    all.push_back(std::move(v));
  }
  Matrix t(s.n, s.n, s.q);
  detail::gl_recurse(s, t, 0, all);
}

inline std::uint64_t gl_order(std::size_t n, std::uint64_t q) {
  std::uint64_t r = 1, qn = ipow(q, static_cast<unsigned>(n));
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t f = qn - ipow(q, static_cast<unsigned>(i));
    if (r > std::numeric_limits<std::uint64_t>::max() / f) return std::numeric_limits<std::uint64_t>::max();
    r *= f;
  }
  return r;
}

inline void require_brute_feasible(std::size_t n, std::uint32_t q, std::uint64_t cap = kBruteCap) {
  if (ipow(q, static_cast<unsigned>(n * n)) > cap) throw CapExceeded("GL(" + std::to_string(n) + "," + std::to_string(q) + ") brute force exceeds cap");
}

// (T^t G T)(a,b) for a,b < k
inline std::uint32_t form_entry(const Matrix& t, const Matrix& g, std::size_t a, std::size_t b) {
  const std::uint32_t q = g.modulus();
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < g.rows(); ++i) {
    if (t(i, a) == 0) continue;
    std::uint64_t inner = 0;
    for (std::size_t j = 0; j < g.cols(); ++j) inner += static_cast<std::uint64_t>(g(i, j)) * t(j, b);
    s += (inner % q) * t(i, a);
  }
  return static_cast<std::uint32_t>(s % q);
}

// ---------------------------------------------------------------- isometry

struct IsometryCoset {
  std::optional<Matrix> representative;
  std::vector<Matrix> elements;  // sorted
};

// All T in GL(n,q) with T^t A_i T = B_i, by backtracking. Throws CapExceeded
// once more than `limit` elements are found.
inline std::vector<Matrix> isometries_backtrack(const MatrixTuple& a, const MatrixTuple& b,
                                                std::uint64_t limit = kBruteCap) {
  require_same_shape(a, b);
  if (a.n != a.n2) throw ShapeMismatch("isometry needs square matrices");
  std::vector<Matrix> out;
  bool over = false;
  GLSearch s;
  s.n = a.n;
  s.q = a.q;
  s.accept = [&](const Matrix& t, std::size_t k) {
    const std::size_t c = k - 1;
    for (std::size_t i = 0; i < a.m(); ++i)
      for (std::size_t x = 0; x <= c; ++x) {
        if (form_entry(t, a.mats[i], x, c) != b.mats[i](x, c)) return false;
        if (x != c && form_entry(t, a.mats[i], c, x) != b.mats[i](c, x)) return false;
      }
    return true;
  };
  s.visit = [&](const Matrix& t) {
    out.push_back(t);
    if (out.size() > limit) {
      over = true;
      return false;
    }
    return true;
  };
  gl_backtrack(s);
  if (over) throw CapExceeded("more than " + std::to_string(limit) + " isometries");
  std::sort(out.begin(), out.end());
  return out;
}

// Same set through the adjoint space: (X,Y) = (T^t, T^-1) with X A_i = B_i Y.
inline std::vector<Matrix> isometries_adjoint(const MatrixTuple& a, const MatrixTuple& b, std::uint64_t cap = kBruteCap) {
  require_same_shape(a, b);
  AdjointBasis adj = adjoint_space(a, b);
  std::vector<Matrix> out;
  const std::size_t n = a.n;
  for_each_in_span(adjoint_vectors(adj), 2 * n * n, a.q, [&](const Vec& v) {
    auto [x, y] = split_adjoint_vector(v, n, n, a.q);
    auto t = inverse(y);
    if (t && t->transpose() == x) out.push_back(*t);
    return true;
  }, cap);
  std::sort(out.begin(), out.end());
  return out;
}

inline IsometryCoset isometry_coset(const MatrixTuple& a, const MatrixTuple& b, std::uint64_t cap = kBruteCap) {
  IsometryCoset c;
  require_same_shape(a, b);
  for (std::size_t i = 0; i < a.m(); ++i)
    if (rank(a.mats[i]) != rank(b.mats[i])) return c;  // isometries preserve ranks
  AdjointBasis adj = adjoint_space(a, b);
  if (ipow(a.q, static_cast<unsigned>(adj.dim())) <= cap) {
    c.elements = isometries_adjoint(a, b, cap);
  } else {
    require_brute_feasible(a.n, a.q, cap);
    c.elements = isometries_backtrack(a, b);
  }
  if (!c.elements.empty()) c.representative = c.elements.front();
  return c;
}

// Aut(G) = Isom(G,G); throws CapExceeded when |Aut(G)| > cap.
inline std::vector<Matrix> autometry_group(const MatrixTuple& g, std::uint64_t cap) {
  AdjointBasis adj = adjoint_algebra(g);
  if (ipow(g.q, static_cast<unsigned>(adj.dim())) <= 1'000'000) {
    auto out = isometries_adjoint(g, g);
    if (out.size() > cap) throw CapExceeded("autometry group larger than " + std::to_string(cap));
    return out;
  }
  require_brute_feasible(g.n, g.q);
  return isometries_backtrack(g, g, cap);
}

// ---------------------------------------------------------------- pseudo-isometry

// All T in GL(n,q) with span(T^t G T) = span(H), in sorted order, by
// column-wise backtracking: the leading (k+1)x(k+1) block of every T^t G_i T
// must lie in the projection of span(H). For alternating G the new column
// enters that block linearly, so admissible columns form an affine space.
// `limit` stops early (useful as an existence test).
inline std::vector<Matrix> pseudo_isometry_bruteforce(const MatrixTuple& g, const MatrixTuple& h,
                                                      std::uint64_t limit = kBruteCap) {
  if (g.n != h.n || g.n2 != h.n2 || g.q != h.q || g.n != g.n2) throw ShapeMismatch("pseudo-isometry shapes");
  require_brute_feasible(g.n, g.q);
  const std::size_t n = g.n;
  const std::uint32_t q = g.q;
  Subspace sh = tuple_span(h);
  if (tuple_span(g).dim() != sh.dim()) return {};
  // projections of span(H) onto leading k x k blocks, coordinates ordered by (b, a)
  std::vector<Subspace> proj(n + 1), annihilator(n + 1);
  for (std::size_t k = 1; k <= n; ++k) {
    std::vector<Vec> rows;
    for (std::size_t i = 0; i < sh.dim(); ++i) {
      Vec full = sh.basis().row(i), v;
      for (std::size_t b = 0; b < k; ++b)
        for (std::size_t a = 0; a < k; ++a) v.push_back(full[a * n + b]);
      rows.push_back(std::move(v));
    }
    proj[k] = Subspace::span_of(rows, k * k, q);
    annihilator[k] = proj[k].perp();
  }
  std::vector<Matrix> found;
  bool stop = false;
  Matrix t(n, n, q);

  auto leaf = [&]() {
    if (tuple_span(transform(g, t)) == sh) found.push_back(t);
    stop = found.size() >= limit;
  };
  auto block_ok = [&](std::size_t k) {
    for (const auto& gi : g.mats) {
      Vec v;
      for (std::size_t b = 0; b < k; ++b)
        for (std::size_t a = 0; a < k; ++a) v.push_back(form_entry(t, gi, a, b));
      if (!proj[k].contains(v)) return false;
    }
    return true;
  };

  // candidate columns for position k: all nonzero vectors, or the affine
  // solution set of the block condition when g is alternating
  auto candidates = [&](std::size_t k) {
    std::vector<Vec> out;
    if (!g.alternating || k == 0) {
      std::uint64_t total = ipow(q, static_cast<unsigned>(n));
      for (std::uint64_t c = 1; c < total; ++c) {
        Vec v(n);
        std::uint64_t x = c;
        for (std::size_t i = n; i-- > 0;) {
          v[i] = static_cast<std::uint32_t>(x % q);
          x /= q;
        }
        out.push_back(std::move(v));
      }
      return out;
    }
    const std::size_t kk = k + 1;
    const Subspace& ann = annihilator[kk];
    // rows: [coefficients of x | constant]
    std::vector<Vec> eqs;
    for (const auto& gi : g.mats) {
      // known entries and linear forms w_a = t_a^t G_i
      std::vector<Vec> w(k, Vec(n, 0));
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t j = 0; j < n; ++j) {
          std::uint64_t acc = 0;
          for (std::size_t i = 0; i < n; ++i) acc += static_cast<std::uint64_t>(t(i, a)) * gi(i, j);
          w[a][j] = static_cast<std::uint32_t>(acc % q);
        }
      for (std::size_t r = 0; r < ann.dim(); ++r) {
        Vec row(n + 1, 0);
        const Matrix& basis = ann.basis();
        for (std::size_t b = 0; b < kk; ++b)
          for (std::size_t a = 0; a < kk; ++a) {
            std::uint32_t coef = basis(r, b * kk + a);
            if (coef == 0) continue;
            if (a < k && b < k) {
              row[n] = static_cast<std::uint32_t>((row[n] + static_cast<std::uint64_t>(coef) * form_entry(t, gi, a, b)) % q);
            } else if (a < k && b == k) {
              for (std::size_t j = 0; j < n; ++j)
                row[j] = static_cast<std::uint32_t>((row[j] + static_cast<std::uint64_t>(coef) * w[a][j]) % q);
            } else if (b < k && a == k) {
              for (std::size_t j = 0; j < n; ++j)
                row[j] = static_cast<std::uint32_t>((row[j] + static_cast<std::uint64_t>(coef) * (q - w[b][j]) ) % q);
            }
          }
        eqs.push_back(std::move(row));
      }
    }
    Matrix sys(eqs.size(), n + 1, q);
    for (std::size_t r = 0; r < eqs.size(); ++r)
      for (std::size_t j = 0; j <= n; ++j) sys(r, j) = eqs[r][j];
    Subspace sol = nullspace(sys);
    std::vector<Vec> basis;
    for (std::size_t i = 0; i < sol.dim(); ++i) basis.push_back(sol.basis().row(i));
    for_each_in_span(basis, n + 1, q, [&](const Vec& v) {
      if (v[n] == 1) {
        Vec x(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n));
        if (std::any_of(x.begin(), x.end(), [](std::uint32_t e) { return e != 0; })) out.push_back(std::move(x));
      }
      return true;
    });
    return out;
  };

  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == n) {
      leaf();
      return;
    }
    std::vector<Vec> prev;
    for (std::size_t j = 0; j < k; ++j) prev.push_back(t.col(j));
    Subspace span = Subspace::span_of(prev, n, q);
    for (const auto& v : candidates(k)) {
      if (k == 0) {
        std::size_t f = 0;
        while (f < v.size() && v[f] == 0) ++f;
        if (f == v.size() || v[f] != 1) continue;
      }
      if (span.contains(v)) continue;
      for (std::size_t i = 0; i < n; ++i) t(i, k) = v[i];
      if (g.alternating || block_ok(k + 1)) rec(k + 1);
      if (stop) return;
    }
    for (std::size_t i = 0; i < n; ++i) t(i, k) = 0;
  };
  rec(0);
  // scalar multiples cT are pseudo-isometries too
  std::vector<Matrix> out;
  for (const auto& m : found)
    for (std::uint32_t c = 1; c < q; ++c) out.push_back(m.scaled(c));
  std::sort(out.begin(), out.end());
  if (out.size() > limit) out.resize(limit);
  return out;
}

inline bool pseudo_isometric(const MatrixTuple& g, const MatrixTuple& h) {
  return !pseudo_isometry_bruteforce(g, h, 1).empty();
}

// ---------------------------------------------------------------- isotopism

struct Isotopism {
  Matrix t, s;  // span(T^t A_i S) = span(B)
};

namespace detail {

inline std::vector<Matrix> basis_matrices(const MatrixTuple& g) {
  Subspace sp = tuple_span(g);
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < sp.dim(); ++i) out.push_back(unflatten(sp.basis().row(i), g.n, g.n2, g.q));
  return out;
}

// Search a linear space (given by basis vectors) for an element passing ok().
inline std::optional<Vec> find_in_space(const std::vector<Vec>& basis, std::size_t len, std::uint32_t q,
                                        const std::function<bool(const Vec&)>& ok, std::uint64_t cap,
                                        std::mt19937_64& rng) {
  if (basis.empty()) {
    Vec z(len, 0);
    if (ok(z)) return z;
    return std::nullopt;
  }
  std::uniform_int_distribution<std::uint32_t> pick(0, q - 1);
  for (int probe = 0; probe < 64; ++probe) {
    Vec v(len, 0);
    for (const auto& b : basis) {
      std::uint32_t c = pick(rng);
      for (std::size_t j = 0; j < len; ++j) v[j] = (v[j] + c * b[j]) % q;
    }
    if (ok(v)) return v;
  }
  std::optional<Vec> hit;
  for_each_in_span(basis, len, q, [&](const Vec& v) {
    if (ok(v)) {
      hit = v;
      return false;
    }
    return true;
  }, cap);
  return hit;
}

// Sorted ranks over the projective points of the span: an isotopism invariant.
inline std::vector<std::size_t> span_rank_multiset(const std::vector<Matrix>& basis, std::uint32_t q) {
  std::vector<std::size_t> out;
  if (basis.empty()) return out;
  for (const auto& v : projective_points(basis.size(), q)) {
    Matrix m(basis[0].rows(), basis[0].cols(), q);
    for (std::size_t i = 0; i < basis.size(); ++i)
      if (v[i]) m = m + basis[i].scaled(v[i]);
    out.push_back(rank(m));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

// Decides whether A and B are isotopic, i.e. span(T^t A S) = span(B) for some
// invertible T, S. Enumerates GL over the smallest of the three dimensions
// and solves a linear system for the rest.
inline std::optional<Isotopism> isotopism_bruteforce(const MatrixTuple& a, const MatrixTuple& b,
                                                     std::uint64_t cap = 2'000'000) {
  if (a.n != b.n || a.n2 != b.n2 || a.q != b.q) throw ShapeMismatch("isotopism shapes");
  const std::uint32_t q = a.q;
  auto ab = detail::basis_matrices(a), bb = detail::basis_matrices(b);
  if (ab.size() != bb.size()) return std::nullopt;
  const std::size_t w = ab.size(), n = a.n, n2 = a.n2;
  if (w == 0) return Isotopism{Matrix::identity(n, q), Matrix::identity(n2, q)};
  if (ipow(q, static_cast<unsigned>(w)) <= 1'000'000 &&
      detail::span_rank_multiset(ab, q) != detail::span_rank_multiset(bb, q))
    return std::nullopt;
  std::mt19937_64 rng(0x5eed);
  Subspace wb = matrix_span(bb, n, n2, q);
  const std::size_t smallest = std::min({n, n2, w});
  if (gl_order(smallest, q) > cap) throw CapExceeded("isotopism search exceeds cap");
  std::optional<Isotopism> result;

  auto right_solve = [&](const std::vector<Matrix>& lhs, const Subspace& target, std::size_t cols_in,
                         std::size_t rows_out) -> std::optional<Matrix> {
    // S with lhs_i S in target for all i; S is cols_in x cols_in
    // constraint: for each i, the flattened lhs_i S must be orthogonal to target^perp
    Subspace perp = target.perp();
    std::vector<Vec> eqs;
    for (const auto& li : lhs)
      for (std::size_t f = 0; f < perp.dim(); ++f) {
        Vec fun = perp.basis().row(f);  // functional on rows_out x cols_in matrices
        Vec eq(cols_in * cols_in, 0);
        // (li S)(r,c) = sum_k li(r,k) S(k,c)
        for (std::size_t r = 0; r < rows_out; ++r)
          for (std::size_t c = 0; c < cols_in; ++c) {
            std::uint32_t coef = fun[r * cols_in + c];
            if (coef == 0) continue;
            for (std::size_t k = 0; k < cols_in; ++k)
              eq[k * cols_in + c] = static_cast<std::uint32_t>((eq[k * cols_in + c] + static_cast<std::uint64_t>(coef) * li(r, k)) % q);
          }
        eqs.push_back(std::move(eq));
      }
    Subspace sol = eqs.empty() ? Subspace::whole(cols_in * cols_in, q) : nullspace(Subspace::span_of(eqs, cols_in * cols_in, q).basis());
    auto hit = detail::find_in_space(sol.basis_vectors(), cols_in * cols_in, q, [&](const Vec& v) {
      return is_invertible(unflatten(v, cols_in, cols_in, q));
    }, cap, rng);
    if (!hit) return std::nullopt;
    return unflatten(*hit, cols_in, cols_in, q);
  };

  if (smallest == n) {
    GLSearch s;
    s.n = n;
    s.q = q;
    s.visit = [&](const Matrix& t) {
      std::vector<Matrix> lhs;
      for (const auto& m : ab) lhs.push_back(t.transpose() * m);
      auto sm = right_solve(lhs, wb, n2, n);
      if (sm) {
        result = Isotopism{t, *sm};
        return false;
      }
      return true;
    };
    gl_backtrack(s);
    return result;
  }
  if (smallest == n2) {
    // transpose the problem: span(S^t A^t T) = span(B^t)
    std::vector<Matrix> at, bt;
    for (const auto& m : ab) at.push_back(m.transpose());
    for (const auto& m : bb) bt.push_back(m.transpose());
    Subspace wbt = matrix_span(bt, n2, n, q);
    GLSearch s;
    s.n = n2;
    s.q = q;
    s.visit = [&](const Matrix& sm) {
      std::vector<Matrix> lhs;
      for (const auto& m : at) lhs.push_back(sm.transpose() * m);
      auto t = right_solve(lhs, wbt, n, n2);
      if (t) {
        result = Isotopism{*t, sm};
        return false;
      }
      return true;
    };
    gl_backtrack(s);
    return result;
  }
  // enumerate recombinations R of B; solve X B'_i = A_i S, then T = X^-t
  GLSearch s;
  s.n = w;
  s.q = q;
  MatrixTuple btup = tuple_of(bb);
  MatrixTuple atup = tuple_of(ab);
  s.visit = [&](const Matrix& r) {
    MatrixTuple br = recombine(btup, r);
    for (std::size_t i = 0; i < w; ++i)
      if (rank(br.mats[i]) != rank(atup.mats[i])) return true;
    AdjointBasis adj = adjoint_space(br, atup);  // X B'_i = A_i S
    auto hit = detail::find_in_space(adjoint_vectors(adj), n * n + n2 * n2, q, [&](const Vec& v) {
      auto [x, sm] = split_adjoint_vector(v, n, n2, q);
      return is_invertible(x) && is_invertible(sm);
    }, cap, rng);
    if (hit) {
      auto [x, sm] = split_adjoint_vector(*hit, n, n2, q);
      result = Isotopism{inverse(x)->transpose(), sm};
      return false;
    }
    return true;
  };
  gl_backtrack(s);
  return result;
}

// ---------------------------------------------------------------- invariants

struct PencilPoint {
  Vec point;
  std::size_t rank;
};

inline std::vector<PencilPoint> pencil_rank_profile(const MatrixTuple& g) {
  std::vector<PencilPoint> out;
  if (g.m() == 0) return out;
  for (auto& v : projective_points(g.m(), g.q)) out.push_back({v, rank(pencil(g, v))});
  return out;
}

// {v : G_i v = 0 for all i}
inline Subspace radical(const MatrixTuple& g) {
  if (g.m() == 0) return Subspace::whole(g.n2, g.q);
  Matrix stacked(g.m() * g.n, g.n2, g.q);
  for (std::size_t i = 0; i < g.m(); ++i)
    for (std::size_t r = 0; r < g.n; ++r)
      for (std::size_t c = 0; c < g.n2; ++c) stacked(i * g.n + r, c) = g.mats[i](r, c);
  return nullspace(stacked);
}

// {u : u^t G_i = 0 for all i}
inline Subspace left_radical(const MatrixTuple& g) {
  std::vector<Matrix> t;
  for (const auto& m : g.mats) t.push_back(m.transpose());
  return radical(tuple_of(t, g.n2, g.n, g.q));
}

// dim A(U) > dim U for every nonzero proper U, where A(U) = span{A_i u}.
inline bool is_stable(const MatrixTuple& a, std::uint64_t cap = kDefaultSubspaceCap) {
  if (a.n != a.n2) throw ShapeMismatch("stability needs square matrices");
  const std::size_t n = a.n;
  for (std::size_t k = 1; k < n; ++k) {
    for (const auto& u : enumerate_subspaces(n, a.q, k, cap)) {
      std::vector<Vec> img;
      for (const auto& m : a.mats)
        for (std::size_t i = 0; i < u.dim(); ++i) img.push_back(m.apply(u.basis().row(i)));
      std::size_t d = img.empty() ? 0 : Subspace::span_of(img, n, a.q).dim();
      if (d <= k) return false;
    }
  }
  return true;
}

// Isotopism-invariant summary used where an exact test is over budget.
inline std::vector<std::uint64_t> isotopism_signature(const MatrixTuple& g) {
  std::vector<std::uint64_t> sig{g.n, g.n2, g.q, tuple_span(g).dim(), radical(g).dim(), left_radical(g).dim()};
  if (g.m() > 0 && ipow(g.q, static_cast<unsigned>(g.m())) <= 100000) {
    std::vector<std::uint64_t> ranks;
    for (const auto& pp : pencil_rank_profile(g)) ranks.push_back(pp.rank);
    std::sort(ranks.begin(), ranks.end());
    sig.insert(sig.end(), ranks.begin(), ranks.end());
  }
  return sig;
}

}  // namespace gpiso
