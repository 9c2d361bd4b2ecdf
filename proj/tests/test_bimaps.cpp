#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "gpiso/bimaps.hpp"

using namespace gpiso;

namespace {

MatrixTuple single(const Matrix& m) { return tuple_of({m}); }

// Independent adjoint dimension: equations A G_i - G_i D = 0 written out
// entry by entry, rows shuffled, then a plain rank computation.
std::size_t adjoint_dim_dense(const MatrixTuple& g, std::uint64_t seed) {
  const std::size_t n = g.n, unknowns = 2 * n * n;
  std::vector<Vec> rows;
  for (const auto& m : g.mats)
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) {
        Vec row(unknowns, 0);
        for (std::size_t k = 0; k < n; ++k) {
          row[r * n + k] = (row[r * n + k] + m(k, c)) % g.q;
          row[n * n + k * n + c] = (row[n * n + k * n + c] + g.q - m(r, k)) % g.q;
        }
        rows.push_back(row);
      }
  std::mt19937_64 rng(seed);
  std::shuffle(rows.begin(), rows.end(), rng);
  Matrix sys(rows.size(), unknowns, g.q);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < unknowns; ++j) sys(i, j) = rows[i][j];
  return unknowns - rank(sys);
}

// Every T in GL(n,q) with span(T^t G T) = span(H), by listing all matrices.
std::vector<Matrix> pseudo_isometries_naive(const MatrixTuple& g, const MatrixTuple& h) {
  const std::size_t n = g.n;
  const std::uint64_t total = ipow(g.q, static_cast<unsigned>(n * n));
  const Subspace sh = tuple_span(h);
  std::vector<Matrix> out;
  for (std::uint64_t code = 0; code < total; ++code) {
    Matrix t(n, n, g.q);
    std::uint64_t c = code;
    for (std::size_t i = 0; i < n * n; ++i) {
      t(i / n, i % n) = static_cast<std::uint32_t>(c % g.q);
      c /= g.q;
    }
    if (!is_invertible(t)) continue;
    if (tuple_span(transform(g, t)) == sh) out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool satisfies(const MatrixTuple& g, const MatrixTuple& h, const Matrix& a, const Matrix& d) {
  for (std::size_t i = 0; i < g.m(); ++i)
    if (a * g.mats[i] != h.mats[i] * d) return false;
  return true;
}

}  // namespace

TEST(Alternating, CharacteristicTwo) {
  EXPECT_TRUE(is_alternating_matrix(Matrix::from_rows({{0, 1}, {1, 0}}, 2)));
  // skew-symmetric over F_2 but v^t G v = 1 for v = e_1
  EXPECT_FALSE(is_alternating_matrix(Matrix::from_rows({{1, 0}, {0, 0}}, 2)));
  EXPECT_TRUE(worked_example_tuple().alternating);
}

TEST(Adjoint, Examples) {
  EXPECT_EQ(adjoint_algebra(single(symplectic(1, 3))).dim(), 4u);
  EXPECT_EQ(adjoint_algebra(zero_tuple(3, 2, 5)).dim(), 18u);
  auto w = worked_example_tuple();
  const std::size_t dim = adjoint_algebra(w).dim();
  EXPECT_EQ(dim, adjoint_dim_dense(w, 1));
  EXPECT_EQ(dim, adjoint_dim_dense(w, 2));
}

TEST(Adjoint, BasisSatisfiesEquationsAndIsClosed) {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 20; ++k) {
    auto g = random_alternating_tuple(4, 2, 3, rng);
    auto adj = adjoint_algebra(g);
    EXPECT_EQ(adj.dim(), adjoint_dim_dense(g, k));
    for (const auto& [a, d] : adj.basis) EXPECT_TRUE(satisfies(g, g, a, d));
    for (const auto& [a, d] : adj.basis)
      for (const auto& [a2, d2] : adj.basis) EXPECT_TRUE(satisfies(g, g, a * a2, d * d2));
  }
}

TEST(Adjoint, SpaceExamples) {
  std::mt19937_64 rng(12);
  auto g = random_alternating_tuple(4, 3, 3, rng);
  auto same = adjoint_space(g, g);
  EXPECT_EQ(same.dim(), adjoint_algebra(g).dim());
  for (int k = 0; k < 10; ++k) {
    Matrix t = random_invertible(4, 3, rng);
    auto h = transform(g, t);
    EXPECT_EQ(adjoint_space(g, h).dim(), adjoint_algebra(g).dim());
  }
  auto j = single(symplectic(1, 3));
  auto z = zero_tuple(2, 1, 3);
  auto s = adjoint_space(j, z);
  EXPECT_EQ(s.dim(), 4u);
  for (const auto& [a, d] : s.basis) EXPECT_TRUE(a.is_zero());
  EXPECT_THROW(adjoint_space(j, zero_tuple(3, 1, 3)), ShapeMismatch);
}

TEST(Autometry, Examples) {
  EXPECT_EQ(autometry_group(single(symplectic(1, 3)), 1000).size(), 24u);
  EXPECT_EQ(autometry_group(zero_tuple(2, 1, 3), 1000).size(), 48u);
  auto w = worked_example_tuple();
  auto via_adj = isometries_adjoint(w, w);
  auto via_gl = isometries_backtrack(w, w);
  EXPECT_EQ(via_adj, via_gl);
  EXPECT_FALSE(via_adj.empty());
  EXPECT_THROW(autometry_group(zero_tuple(2, 1, 3), 10), CapExceeded);
}

TEST(IsometryCoset, Examples) {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 5; ++k) {
    auto a = random_alternating_tuple(4, 3, 3, rng);
    auto aut = autometry_group(a, 1'000'000);
    auto self = isometry_coset(a, a);
    EXPECT_EQ(self.elements, aut);
    Matrix t0 = random_invertible(4, 3, rng);
    auto b = transform(a, t0);
    auto c = isometry_coset(a, b);
    EXPECT_EQ(c.elements.size(), aut.size());
    EXPECT_TRUE(std::binary_search(c.elements.begin(), c.elements.end(), t0));
    for (const auto& t : c.elements) EXPECT_EQ(transform(a, t), b);
  }
  Matrix r2(4, 4, 3);
  r2(0, 1) = 1;
  r2(1, 0) = 2;
  auto c = isometry_coset(single(r2), single(symplectic(2, 3)));
  EXPECT_TRUE(c.elements.empty());
  EXPECT_FALSE(c.representative);
}

TEST(PseudoIsometry, Examples) {
  auto j = single(symplectic(1, 3));
  auto id = Matrix::identity(2, 3);
  auto self = pseudo_isometry_bruteforce(j, j);
  EXPECT_TRUE(std::binary_search(self.begin(), self.end(), id));
  auto two = single(symplectic(1, 3).scaled(2));
  auto scaled = pseudo_isometry_bruteforce(j, two);
  EXPECT_TRUE(std::binary_search(scaled.begin(), scaled.end(), id));
}

TEST(PseudoIsometry, AgreesWithNaiveEnumeration) {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 6; ++k) {
    auto g = random_alternating_tuple(3, 1 + k % 2, 3, rng);
    auto h = k % 3 == 0 ? random_alternating_tuple(3, g.m(), 3, rng) : transform(g, random_invertible(3, 3, rng));
    EXPECT_EQ(pseudo_isometry_bruteforce(g, h), pseudo_isometries_naive(g, h));
  }
  for (int k = 0; k < 4; ++k) {
    auto g = random_alternating_tuple(3, 2, 2, rng);
    auto h = transform(g, random_invertible(3, 2, rng));
    EXPECT_EQ(pseudo_isometry_bruteforce(g, h), pseudo_isometries_naive(g, h));
  }
}

TEST(Isotopism, Examples) {
  auto w = worked_example_tuple();
  auto iso = isotopism_bruteforce(w, w);
  ASSERT_TRUE(iso);
  EXPECT_TRUE(tuple_span(transform(w, iso->t, iso->s)) == tuple_span(w));
  Matrix r2(4, 4, 3);
  r2(0, 1) = 1;
  r2(1, 0) = 2;
  EXPECT_FALSE(isotopism_bruteforce(single(r2), single(symplectic(2, 3))));
  std::mt19937_64 rng(2);
  auto a = random_tuple(3, 2, 2, 3, rng);
  Matrix t = random_invertible(3, 3, rng), s = random_invertible(2, 3, rng);
  auto b = recombine(transform(a, t, s), random_invertible(2, 3, rng));
  auto found = isotopism_bruteforce(a, b);
  ASSERT_TRUE(found);
  EXPECT_TRUE(tuple_span(transform(a, found->t, found->s)) == tuple_span(b));
}

TEST(Pencil, WorkedExampleProfile) {
  auto prof = pencil_rank_profile(worked_example_tuple());
  ASSERT_EQ(prof.size(), 13u);
  std::vector<Vec> low;
  for (const auto& p : prof) {
    EXPECT_TRUE(p.rank == 2 || p.rank == 4);
    if (p.rank == 2) low.push_back(p.point);
  }
  std::sort(low.begin(), low.end());
  EXPECT_EQ(low, (std::vector<Vec>{{0, 0, 1}, {0, 1, 0}, {1, 1, 2}, {1, 2, 1}}));
}

TEST(Pencil, DegenerateProfiles) {
  for (const auto& p : pencil_rank_profile(zero_tuple(3, 2, 3))) EXPECT_EQ(p.rank, 0u);
  auto t = tuple_of({symplectic(2, 3), Matrix(4, 4, 3)});
  for (const auto& p : pencil_rank_profile(t)) EXPECT_EQ(p.rank, p.point[0] ? 4u : 0u);
}

TEST(Pencil, RankMultisetInvariantUnderPseudoIsometry) {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 10; ++k) {
    auto g = random_alternating_tuple(4, 3, 3, rng);
    auto h = recombine(transform(g, random_invertible(4, 3, rng)), random_invertible(3, 3, rng));
    std::vector<std::size_t> rg, rh;
    for (const auto& p : pencil_rank_profile(g)) rg.push_back(p.rank);
    for (const auto& p : pencil_rank_profile(h)) rh.push_back(p.rank);
    std::sort(rg.begin(), rg.end());
    std::sort(rh.begin(), rh.end());
    EXPECT_EQ(rg, rh);
  }
}

TEST(Stability, Examples) {
  EXPECT_FALSE(is_stable(zero_tuple(3, 2, 3)));
  EXPECT_TRUE(is_stable(zero_tuple(1, 2, 3)));
}

TEST(Stability, ImpliesSmallAdjoint) {
  std::mt19937_64 rng(99);
  std::size_t stable = 0;
  for (int k = 0; k < 100; ++k) {
    auto a = random_tuple(4, 4, 4, 3, rng);
    if (!is_stable(a)) continue;
    ++stable;
    EXPECT_LE(adjoint_algebra(a).dim(), 4u);
  }
  EXPECT_GT(stable, 0u);
}

TEST(Radical, Examples) {
  EXPECT_EQ(radical(single(symplectic(2, 3))).dim(), 0u);
  EXPECT_EQ(radical(zero_tuple(3, 2, 3)).dim(), 3u);
  EXPECT_EQ(radical(single(worked_example_tuple().mats[1])).dim(), 2u);
}
