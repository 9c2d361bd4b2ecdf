#include <random>

#include <gtest/gtest.h>

#include "gpiso/bimaps.hpp"
#include "gpiso/linalg.hpp"

using namespace gpiso;


TEST(Rref, IdentityIsFixed) {
  auto r = rref(Matrix::identity(3, 3));
  EXPECT_EQ(r.rref, Matrix::identity(3, 3));
  EXPECT_EQ(r.rank, 3u);
}

TEST(Rref, ZeroMatrix) {
  auto r = rref(Matrix(2, 4, 5));
  EXPECT_TRUE(r.rref.is_zero());
  EXPECT_EQ(r.rank, 0u);
}

TEST(Rref, WorkedExampleRanks) {
  auto t = worked_example_tuple();
  EXPECT_EQ(rank(t.mats[2]), 2u);
  EXPECT_EQ(rank(t.mats[1]), 2u);
  EXPECT_EQ(nullspace(t.mats[1]).dim(), 2u);
}

TEST(Rref, CompositeModulusRejected) {
  EXPECT_THROW(rref(Matrix::identity(2, 4)), CompositeModulus);
  EXPECT_THROW(nullspace(Matrix::identity(2, 6)), CompositeModulus);
}

TEST(Rref, CompositeArithmeticWorks) {
  Matrix a = Matrix::from_rows({{1, 3}, {0, 1}}, 4);
  EXPECT_EQ(a.pow(4), Matrix::identity(2, 4));
  EXPECT_EQ((a * a)(0, 1), 2u);
}

TEST(Rref, IdempotentAndRankOfTranspose) {
  std::mt19937_64 rng(7);
  for (std::uint32_t q : {2u, 3u, 5u})
    for (std::size_t n : {2u, 3u, 5u})
      for (int k = 0; k < 200; ++k) {
        Matrix m = random_matrix(n, n + 1, q, rng);
        auto r = rref(m);
        EXPECT_EQ(rref(r.rref).rref, r.rref);
        EXPECT_EQ(r.rank, rank(m.transpose()));
      }
}

TEST(Nullspace, Extremes) {
  EXPECT_EQ(nullspace(Matrix::identity(4, 3)).dim(), 0u);
  EXPECT_EQ(nullspace(Matrix(3, 4, 3)).dim(), 4u);
}

TEST(Nullspace, AnnihilatesAndHasComplementaryDimension) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 100; ++k) {
    Matrix m = random_matrix(3, 5, 3, rng);
    Subspace ns = nullspace(m);
    EXPECT_EQ(ns.dim(), 5 - rank(m));
    for (const auto& v : ns.basis_vectors())
      for (auto x : m.apply(v)) EXPECT_EQ(x, 0u);
  }
}

TEST(SpanEqual, ScalarsAndZero) {
  auto g = worked_example_tuple().mats[0];
  EXPECT_TRUE(span_equal({g}, {g.scaled(2)}));
  EXPECT_FALSE(span_equal({g}, {Matrix(4, 4, 3)}));
  EXPECT_THROW(span_equal({g}, {Matrix(3, 3, 3)}), ShapeMismatch);
}

TEST(SpanEqual, RecombinationKeepsSpan) {
  auto t = worked_example_tuple();
  std::mt19937_64 rng(3);
  Matrix r;
  do r = random_matrix(3, 3, 3, rng);
  while (!is_invertible(r));
  std::vector<Matrix> mixed;
  for (std::size_t i = 0; i < 3; ++i) {
    Matrix s(4, 4, 3);
    for (std::size_t j = 0; j < 3; ++j) s = s + t.mats[j].scaled(r(i, j));
    mixed.push_back(s);
  }
  EXPECT_TRUE(span_equal(t.mats, mixed));
}

TEST(SpanEqual, EquivalenceOnRandomCorpus) {
  std::mt19937_64 rng(5);
  std::vector<std::vector<Matrix>> corpus;
  for (int k = 0; k < 12; ++k) {
    std::vector<Matrix> s;
    for (int i = 0; i < 2; ++i) s.push_back(random_matrix(2, 2, 2, rng));
    corpus.push_back(s);
  }
  for (const auto& a : corpus) {
    EXPECT_TRUE(span_equal(a, a));
    for (const auto& b : corpus) {
      EXPECT_EQ(span_equal(a, b), span_equal(b, a));
      for (const auto& c : corpus)
        if (span_equal(a, b) && span_equal(b, c)) EXPECT_TRUE(span_equal(a, c));
    }
  }
}

TEST(Subspaces, WorkedExamplePointCount) {
  EXPECT_EQ(enumerate_subspaces(3, 3, 1).size(), 13u);
  EXPECT_EQ(enumerate_subspaces(4, 3, 4).size(), 1u);
  EXPECT_EQ(enumerate_subspaces(4, 3, 2).size(), 130u);
}

TEST(Subspaces, CountsMatchGaussianBinomial) {
  for (std::uint32_t q : {2u, 3u, 5u})
    for (unsigned n = 0; n <= 5; ++n)
      for (unsigned d = 0; d <= n; ++d) {
        auto subs = enumerate_subspaces(n, q, d);
        EXPECT_EQ(subs.size(), gaussian_binomial(n, d, q)) << n << ' ' << d << ' ' << q;
        for (std::size_t i = 1; i < subs.size(); ++i) EXPECT_FALSE(subs[i] == subs[i - 1]);
      }
}

TEST(Subspaces, CapIsEnforced) { EXPECT_THROW(enumerate_subspaces(6, 3, 3, 100), CapExceeded); }

TEST(Gaussian, Values) {
  EXPECT_EQ(gaussian_binomial(3, 1, 3), 13u);
  EXPECT_EQ(gaussian_binomial(7, 0, 5), 1u);
  EXPECT_EQ(gaussian_binomial(4, 2, 3), 130u);
}

TEST(Modulus, PrimeFlagAndBound) {
  EXPECT_TRUE(Modulus::of(7).prime);
  EXPECT_FALSE(Modulus::of(9).prime);
  EXPECT_THROW(Modulus::of(1u << 17), InputError);
}

TEST(Matrix, TextRoundTrip) {
  Matrix m = Matrix::from_rows({{1, 2, 0}, {0, 4, 3}}, 5);
  EXPECT_EQ(Matrix::from_text(m.to_text()), m);
}

TEST(Matrix, InverseOverPrimeField) {
  std::mt19937_64 rng(9);
  for (int k = 0; k < 50; ++k) {
    Matrix m = random_matrix(4, 4, 5, rng);
    auto inv = inverse(m);
    EXPECT_EQ(inv.has_value(), is_invertible(m));
    if (inv) EXPECT_EQ(m * *inv, Matrix::identity(4, 5));
  }
}
