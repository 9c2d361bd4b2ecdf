#pragma once

// Dense linear algebra over Z/b. Rank, echelon and subspace routines need
// a prime modulus; plain arithmetic works for any b <= 2^16.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "gpiso/error.hpp"

namespace gpiso {

using Vec = std::vector<std::uint32_t>;

inline constexpr std::uint32_t kMaxModulus = 1u << 16;
inline constexpr std::uint64_t kDefaultSubspaceCap = 10'000'000;

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

struct Modulus {
  std::uint32_t b = 2;
  bool prime = true;

  static Modulus of(std::uint64_t b) {
    if (b < 2 || b > kMaxModulus) throw InputError("modulus out of range: " + std::to_string(b));
    return Modulus{static_cast<std::uint32_t>(b), is_prime(b)};
  }
};

inline std::uint32_t inv_mod(std::uint32_t a, std::uint32_t m) {
  std::int64_t t = 0, nt = 1, r = m, nr = a % m;
  while (nr != 0) {
    std::int64_t q = r / nr;
    std::tie(t, nt) = std::make_pair(nt, t - q * nt);
    std::tie(r, nr) = std::make_pair(nr, r - q * nr);
  }
  if (r != 1) throw CompositeModulus("element " + std::to_string(a) + " not invertible mod " + std::to_string(m));
  if (t < 0) t += m;
  return static_cast<std::uint32_t>(t);
}

inline std::uint32_t reduce_signed(std::int64_t v, std::uint32_t m) {
  std::int64_t r = v % static_cast<std::int64_t>(m);
  return static_cast<std::uint32_t>(r < 0 ? r + m : r);
}

inline std::uint64_t ipow(std::uint64_t base, unsigned e) {
  std::uint64_t r = 1;
  while (e--) {
    if (base != 0 && r > std::numeric_limits<std::uint64_t>::max() / base)
      return std::numeric_limits<std::uint64_t>::max();
    r *= base;
  }
  return r;
}

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, std::uint32_t mod)
      : rows_(rows), cols_(cols), mod_(mod), a_(rows * cols, 0) {
    if (mod < 2 || mod > kMaxModulus) throw InputError("modulus out of range");
  }

  static Matrix identity(std::size_t n, std::uint32_t mod) {
    Matrix m(n, n, mod);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }

  static Matrix from_rows(const std::vector<std::vector<std::int64_t>>& rows, std::uint32_t mod) {
    std::size_t r = rows.size();
    std::size_t c = r ? rows[0].size() : 0;
    Matrix m(r, c, mod);
    for (std::size_t i = 0; i < r; ++i) {
      if (rows[i].size() != c) throw ShapeMismatch("ragged rows");
      for (std::size_t j = 0; j < c; ++j) m(i, j) = reduce_signed(rows[i][j], mod);
    }
    return m;
  }

  static Matrix row_vector(const Vec& v, std::uint32_t mod) {
    Matrix m(1, v.size(), mod);
    for (std::size_t j = 0; j < v.size(); ++j) m(0, j) = v[j] % mod;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::uint32_t modulus() const { return mod_; }
  const std::vector<std::uint32_t>& data() const { return a_; }
  std::vector<std::uint32_t>& data() { return a_; }

  std::uint32_t& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  std::uint32_t operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  Vec row(std::size_t i) const { return Vec(a_.begin() + i * cols_, a_.begin() + (i + 1) * cols_); }
  Vec col(std::size_t j) const {
    Vec v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
  }

  bool is_zero() const {
    return std::all_of(a_.begin(), a_.end(), [](std::uint32_t x) { return x == 0; });
  }
  bool is_square() const { return rows_ == cols_; }

  friend bool operator==(const Matrix& x, const Matrix& y) {
    return x.rows_ == y.rows_ && x.cols_ == y.cols_ && x.mod_ == y.mod_ && x.a_ == y.a_;
  }
  friend bool operator!=(const Matrix& x, const Matrix& y) { return !(x == y); }
  friend bool operator<(const Matrix& x, const Matrix& y) {
    if (x.rows_ != y.rows_) return x.rows_ < y.rows_;
    if (x.cols_ != y.cols_) return x.cols_ < y.cols_;
    return x.a_ < y.a_;
  }

  Matrix operator*(const Matrix& o) const {
    if (cols_ != o.rows_ || mod_ != o.mod_) throw ShapeMismatch("multiply");
    Matrix r(rows_, o.cols_, mod_);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < o.cols_; ++j) {
        std::uint64_t s = 0;
        for (std::size_t k = 0; k < cols_; ++k)
          s += static_cast<std::uint64_t>((*this)(i, k)) * o(k, j);
        r(i, j) = static_cast<std::uint32_t>(s % mod_);
      }
    }
    return r;
  }

  Matrix operator+(const Matrix& o) const {
    check_same(o);
    Matrix r(*this);
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] = (a_[i] + o.a_[i]) % mod_;
    return r;
  }

  Matrix operator-(const Matrix& o) const {
    check_same(o);
    Matrix r(*this);
    for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] = (a_[i] + mod_ - o.a_[i]) % mod_;
    return r;
  }

  Matrix scaled(std::uint32_t c) const {
    Matrix r(*this);
    for (auto& x : r.a_) x = static_cast<std::uint32_t>((static_cast<std::uint64_t>(x) * c) % mod_);
    return r;
  }

  // this += c * o
  void add_scaled(const Matrix& o, std::uint32_t c) {
    check_same(o);
    for (std::size_t i = 0; i < a_.size(); ++i)
      a_[i] = static_cast<std::uint32_t>((a_[i] + static_cast<std::uint64_t>(o.a_[i]) * c) % mod_);
  }

  Matrix transpose() const {
    Matrix r(cols_, rows_, mod_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
  }

  Matrix pow(std::uint64_t e) const {
    if (!is_square()) throw ShapeMismatch("pow of non-square");
    Matrix result = identity(rows_, mod_), base = *this;
    while (e) {
      if (e & 1) result = result * base;
      base = base * base;
      e >>= 1;
    }
    return result;
  }

  Vec apply(const Vec& v) const {
    if (v.size() != cols_) throw ShapeMismatch("apply");
    Vec r(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      std::uint64_t s = 0;
      for (std::size_t k = 0; k < cols_; ++k) s += static_cast<std::uint64_t>((*this)(i, k)) * v[k];
      r[i] = static_cast<std::uint32_t>(s % mod_);
    }
    return r;
  }

  // Text format: "rows cols b" then one line per row.
  std::string to_text() const {
    std::ostringstream os;
    os << rows_ << ' ' << cols_ << ' ' << mod_ << '\n';
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) os << (j ? " " : "") << (*this)(i, j);
      os << '\n';
    }
    return os.str();
  }

  static Matrix from_text(const std::string& text) {
    std::istringstream is(text);
    std::int64_t r = -1, c = -1, b = -1;
    if (!(is >> r >> c >> b) || r < 0 || c < 0) throw InputError("bad matrix header");
    Matrix m(static_cast<std::size_t>(r), static_cast<std::size_t>(c), Modulus::of(static_cast<std::uint64_t>(b)).b);
    for (std::int64_t i = 0; i < r; ++i)
      for (std::int64_t j = 0; j < c; ++j) {
        std::int64_t v;
        if (!(is >> v)) throw InputError("matrix body too short");
        m(i, j) = reduce_signed(v, m.mod_);
      }
    std::string extra;
    if (is >> extra) throw InputError("trailing data in matrix text");
    return m;
  }

 private:
  void check_same(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_ || mod_ != o.mod_) throw ShapeMismatch("elementwise op");
  }

  std::size_t rows_ = 0, cols_ = 0;
  std::uint32_t mod_ = 2;
  std::vector<std::uint32_t> a_;
};

inline void require_prime(std::uint32_t q) {
  if (!is_prime(q)) throw CompositeModulus("modulus " + std::to_string(q) + " is not prime");
}

struct Rref {
  Matrix rref;
  std::size_t rank = 0;
  std::vector<std::size_t> pivots;
};

inline Rref rref(const Matrix& m) {
  const std::uint32_t p = m.modulus();
  require_prime(p);
  Rref out{m, 0, {}};
  Matrix& a = out.rref;
  const std::size_t R = a.rows(), C = a.cols();
  std::size_t r = 0;
  for (std::size_t c = 0; c < C && r < R; ++c) {
    std::size_t piv = r;
    while (piv < R && a(piv, c) == 0) ++piv;
    if (piv == R) continue;
    if (piv != r)
      for (std::size_t j = 0; j < C; ++j) std::swap(a(piv, j), a(r, j));
    std::uint32_t inv = inv_mod(a(r, c), p);
    for (std::size_t j = c; j < C; ++j) a(r, j) = static_cast<std::uint32_t>((static_cast<std::uint64_t>(a(r, j)) * inv) % p);
    for (std::size_t i = 0; i < R; ++i) {
      if (i == r || a(i, c) == 0) continue;
      std::uint64_t f = p - a(i, c);
      for (std::size_t j = c; j < C; ++j)
        a(i, j) = static_cast<std::uint32_t>((a(i, j) + f * a(r, j)) % p);
    }
    out.pivots.push_back(c);
    ++r;
  }
  out.rank = r;
  return out;
}

inline std::size_t rank(const Matrix& m) { return rref(m).rank; }

inline std::optional<Matrix> inverse(const Matrix& m) {
  if (!m.is_square()) throw ShapeMismatch("inverse of non-square");
  const std::size_t n = m.rows();
  Matrix aug(n, 2 * n, m.modulus());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = m(i, j);
    aug(i, n + i) = 1;
  }
  Rref r = rref(aug);
  if (r.rank < n || r.pivots[n - 1] != n - 1) return std::nullopt;
  Matrix inv(n, n, m.modulus());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inv(i, j) = r.rref(i, n + j);
  return inv;
}

inline bool is_invertible(const Matrix& m) { return m.is_square() && rank(m) == m.rows(); }

// Normalize so the first nonzero coordinate is 1. Returns false for zero.
inline bool normalize_projective(Vec& v, std::uint32_t p) {
  for (auto x : v) {
    if (x == 0) continue;
    std::uint32_t inv = inv_mod(x, p);
    for (auto& y : v) y = static_cast<std::uint32_t>((static_cast<std::uint64_t>(y) * inv) % p);
    return true;
  }
  return false;
}

inline std::uint32_t dot(const Vec& a, const Vec& b, std::uint32_t p) {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<std::uint64_t>(a[i]) * b[i];
  return static_cast<std::uint32_t>(s % p);
}

// A subspace of F_q^n stored by its reduced row echelon basis.
class Subspace {
 public:
  Subspace() = default;
  Subspace(std::size_t n, std::uint32_t q) : n_(n), q_(q), basis_(0, n, q) { require_prime(q); }

  static Subspace span(const Matrix& rows) {
    Subspace s(rows.cols(), rows.modulus());
    Rref r = rref(rows);
    s.basis_ = Matrix(r.rank, rows.cols(), rows.modulus());
    for (std::size_t i = 0; i < r.rank; ++i)
      for (std::size_t j = 0; j < rows.cols(); ++j) s.basis_(i, j) = r.rref(i, j);
    s.pivots_ = std::move(r.pivots);
    return s;
  }

  static Subspace span_of(const std::vector<Vec>& vs, std::size_t n, std::uint32_t q) {
    Matrix m(vs.size(), n, q);
    for (std::size_t i = 0; i < vs.size(); ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) = vs[i][j] % q;
    return span(m);
  }

  static Subspace whole(std::size_t n, std::uint32_t q) { return span(Matrix::identity(n, q)); }

  std::size_t ambient_dim() const { return n_; }
  std::uint32_t field() const { return q_; }
  std::size_t dim() const { return basis_.rows(); }
  const Matrix& basis() const { return basis_; }
  const std::vector<std::size_t>& pivots() const { return pivots_; }
  std::vector<Vec> basis_vectors() const {
    std::vector<Vec> out;
    for (std::size_t i = 0; i < dim(); ++i) out.push_back(basis_.row(i));
    return out;
  }

  // Reduce v against the basis; zero result means membership.
  Vec reduce(Vec v) const {
    for (std::size_t i = 0; i < dim(); ++i) {
      std::uint32_t c = v[pivots_[i]];
      if (c == 0) continue;
      std::uint64_t f = q_ - c;
      for (std::size_t j = 0; j < n_; ++j)
        v[j] = static_cast<std::uint32_t>((v[j] + f * basis_(i, j)) % q_);
    }
    return v;
  }

  bool contains(const Vec& v) const {
    Vec r = reduce(v);
    return std::all_of(r.begin(), r.end(), [](std::uint32_t x) { return x == 0; });
  }

  bool contains(const Subspace& o) const {
    for (std::size_t i = 0; i < o.dim(); ++i)
      if (!contains(o.basis_.row(i))) return false;
    return true;
  }

  Subspace plus(const Subspace& o) const {
    Matrix m(dim() + o.dim(), n_, q_);
    for (std::size_t i = 0; i < dim(); ++i)
      for (std::size_t j = 0; j < n_; ++j) m(i, j) = basis_(i, j);
    for (std::size_t i = 0; i < o.dim(); ++i)
      for (std::size_t j = 0; j < n_; ++j) m(dim() + i, j) = o.basis_(i, j);
    return span(m);
  }

  Subspace plus(const Vec& v) const { return plus(span(Matrix::row_vector(v, q_))); }

  // Orthogonal complement under the standard dot product.
  Subspace perp() const;

  // Normalized projective points of the subspace, in lex order.
  std::vector<Vec> points() const;

  friend bool operator==(const Subspace& a, const Subspace& b) {
    return a.n_ == b.n_ && a.q_ == b.q_ && a.basis_ == b.basis_;
  }
  friend bool operator<(const Subspace& a, const Subspace& b) {
    if (a.dim() != b.dim()) return a.dim() < b.dim();
    return a.basis_.data() < b.basis_.data();
  }

 private:
  std::size_t n_ = 0;
  std::uint32_t q_ = 2;
  Matrix basis_;
  std::vector<std::size_t> pivots_;
};

inline Subspace nullspace(const Matrix& m) {
  const std::uint32_t p = m.modulus();
  Rref r = rref(m);
  const std::size_t C = m.cols();
  std::vector<bool> is_pivot(C, false);
  for (auto c : r.pivots) is_pivot[c] = true;
  std::vector<Vec> basis;
  for (std::size_t f = 0; f < C; ++f) {
    if (is_pivot[f]) continue;
    Vec v(C, 0);
    v[f] = 1;
    for (std::size_t i = 0; i < r.rank; ++i) {
      std::uint32_t x = r.rref(i, f);
      v[r.pivots[i]] = x == 0 ? 0 : p - x;
    }
    basis.push_back(std::move(v));
  }
  return Subspace::span_of(basis, C, p);
}

inline Subspace Subspace::perp() const {
  if (dim() == 0) return whole(n_, q_);
  return nullspace(basis_);
}

// All normalized nonzero vectors of F_q^n in lex order.
inline std::vector<Vec> projective_points(std::size_t n, std::uint32_t q, std::uint64_t cap = kDefaultSubspaceCap) {
  require_prime(q);
  std::uint64_t total = ipow(q, static_cast<unsigned>(n));
  if (total > cap) throw CapExceeded("projective space too large");
  std::vector<Vec> out;
  for (std::size_t lead = n; lead-- > 0;) {
    // vectors whose first nonzero coordinate is at position lead, value 1
    std::size_t tail = n - lead - 1;
    std::uint64_t cnt = ipow(q, static_cast<unsigned>(tail));
    for (std::uint64_t code = 0; code < cnt; ++code) {
      Vec v(n, 0);
      v[lead] = 1;
      std::uint64_t c = code;
      for (std::size_t j = n; j-- > lead + 1;) {
        v[j] = static_cast<std::uint32_t>(c % q);
        c /= q;
      }
      out.push_back(std::move(v));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<Vec> Subspace::points() const {
  std::vector<Vec> out;
  const std::size_t d = dim();
  if (d == 0) return out;
  std::uint64_t total = ipow(q_, static_cast<unsigned>(d));
  if (total > kDefaultSubspaceCap) throw CapExceeded("subspace too large to list points");
  for (std::uint64_t code = 1; code < total; ++code) {
    Vec coeff(d);
    std::uint64_t c = code;
    for (std::size_t i = 0; i < d; ++i) {
      coeff[i] = static_cast<std::uint32_t>(c % q_);
      c /= q_;
    }
    // keep only coefficient vectors whose first nonzero entry is 1
    std::size_t first = 0;
    while (coeff[first] == 0) ++first;
    if (coeff[first] != 1) continue;
    Vec v(n_, 0);
    for (std::size_t i = 0; i < d; ++i) {
      if (coeff[i] == 0) continue;
      for (std::size_t j = 0; j < n_; ++j)
        v[j] = static_cast<std::uint32_t>((v[j] + static_cast<std::uint64_t>(coeff[i]) * basis_(i, j)) % q_);
    }
    normalize_projective(v, q_);
    out.push_back(std::move(v));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Gaussian binomial [n choose d]_q, saturating at uint64 max.
inline std::uint64_t gaussian_binomial(unsigned n, unsigned d, std::uint64_t q) {
  if (d > n) return 0;
  std::vector<std::vector<unsigned __int128>> t(n + 1, std::vector<unsigned __int128>(n + 1, 0));
  const unsigned __int128 sat = std::numeric_limits<std::uint64_t>::max();
  for (unsigned i = 0; i <= n; ++i) {
    t[i][0] = 1;
    unsigned __int128 qk = 1;
    for (unsigned k = 1; k <= i; ++k) {
      qk = std::min<unsigned __int128>(qk * q, sat);
      // [i,k] = [i-1,k-1] + q^k [i-1,k]
      unsigned __int128 v = t[i - 1][k - 1] + qk * t[i - 1][k];
      t[i][k] = std::min(v, sat);
    }
  }
  return static_cast<std::uint64_t>(t[n][d]);
}

// Every d-dimensional subspace of F_q^n exactly once, sorted by RREF entries.
inline std::vector<Subspace> enumerate_subspaces(std::size_t n, std::uint32_t q, std::size_t d,
                                                 std::uint64_t cap = kDefaultSubspaceCap) {
  require_prime(q);
  if (d > n) throw InputError("subspace dimension exceeds ambient dimension");
  std::uint64_t count = gaussian_binomial(static_cast<unsigned>(n), static_cast<unsigned>(d), q);
  if (count > cap) throw CapExceeded("subspace count " + std::to_string(count) + " exceeds cap");
  std::vector<Subspace> out;
  out.reserve(count);
  std::vector<std::size_t> piv(d);
  std::iota(piv.begin(), piv.end(), 0);
  while (true) {
    // free slots: (row r, column c) with c > piv[r] and c not a pivot
    std::vector<std::pair<std::size_t, std::size_t>> slots;
    std::vector<bool> is_piv(n, false);
    for (auto c : piv) is_piv[c] = true;
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = piv[r] + 1; c < n; ++c)
        if (!is_piv[c]) slots.emplace_back(r, c);
    std::vector<std::uint32_t> vals(slots.size(), 0);
    while (true) {
      Matrix b(d, n, q);
      for (std::size_t r = 0; r < d; ++r) b(r, piv[r]) = 1;
      for (std::size_t i = 0; i < slots.size(); ++i) b(slots[i].first, slots[i].second) = vals[i];
      out.push_back(Subspace::span(b));
      std::size_t i = 0;
      while (i < vals.size() && ++vals[i] == q) vals[i++] = 0;
      if (i == vals.size()) break;
    }
    // next pivot combination
    std::size_t k = d;
    while (k > 0 && piv[k - 1] == n - d + k - 1) --k;
    if (k == 0) break;
    ++piv[k - 1];
    for (std::size_t j = k; j < d; ++j) piv[j] = piv[j - 1] + 1;
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Flatten each matrix into one row of a coefficient matrix.
inline Matrix flatten_rows(const std::vector<Matrix>& ms) {
  if (ms.empty()) return Matrix();
  const std::size_t len = ms[0].rows() * ms[0].cols();
  Matrix out(ms.size(), len, ms[0].modulus());
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (ms[i].rows() != ms[0].rows() || ms[i].cols() != ms[0].cols() || ms[i].modulus() != ms[0].modulus())
      throw ShapeMismatch("matrices in a span must share shape and modulus");
    for (std::size_t j = 0; j < len; ++j) out(i, j) = ms[i].data()[j];
  }
  return out;
}

inline Subspace matrix_span(const std::vector<Matrix>& ms, std::size_t rows, std::size_t cols, std::uint32_t q) {
  if (ms.empty()) return Subspace(rows * cols, q);
  return Subspace::span(flatten_rows(ms));
}

inline bool span_equal(const std::vector<Matrix>& s1, const std::vector<Matrix>& s2) {
  if (s1.empty() && s2.empty()) return true;
  const Matrix& ref = s1.empty() ? s2[0] : s1[0];
  for (const auto* s : {&s1, &s2})
    for (const auto& m : *s)
      if (m.rows() != ref.rows() || m.cols() != ref.cols() || m.modulus() != ref.modulus())
        throw ShapeMismatch("span_equal shapes differ");
  return matrix_span(s1, ref.rows(), ref.cols(), ref.modulus()) ==
         matrix_span(s2, ref.rows(), ref.cols(), ref.modulus());
}

inline Matrix unflatten(const Vec& v, std::size_t rows, std::size_t cols, std::uint32_t q) {
  Matrix m(rows, cols, q);
  for (std::size_t i = 0; i < rows * cols; ++i) m.data()[i] = v[i];
  return m;
}

}  // namespace gpiso
