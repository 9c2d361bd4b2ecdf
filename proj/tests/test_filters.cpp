#include <random>
#include <set>

#include <gtest/gtest.h>

#include "gpiso/filters.hpp"
#include "gpiso/group_library.hpp"
#include "gpiso/iso_search.hpp"

using namespace gpiso;

namespace {

Group s4_marked() {
  return library::from_permutations({{1, 0, 3, 2}, {2, 3, 0, 1}, {1, 2, 3, 0}, {1, 0, 2, 3}});
}

std::vector<Subgroup> normal_subgroups(const Group& g) {
  std::set<Subgroup> out;
  for (Elem x = 0; x < g.order(); ++x) out.insert(normal_closure(g, {x}, g.whole()));
  std::vector<Subgroup> singles(out.begin(), out.end());
  for (const auto& a : singles)
    for (const auto& b : singles) out.insert(product(g, a, b));
  return {out.begin(), out.end()};
}

bool image_contains(const Filter& f, const Subgroup& h) {
  for (const auto& t : f.terms())
    if (t.subgroup == h) return true;
  return false;
}

}  // namespace

TEST(Labels, ColexOrder) {
  EXPECT_TRUE(colex_less({1, 0}, {2, 0}));
  EXPECT_TRUE(colex_less({2, 0}, {0, 1}));
  EXPECT_EQ(add({1, 2}, {3, 0}), (Label{4, 2}));
}

TEST(InitialFilter, S4) {
  Group s4 = s4_marked();
  Filter f = initial_filter(s4);
  ASSERT_EQ(f.dim(), 2u);
  EXPECT_EQ(f.at({0, 0}).size(), 24u);
  EXPECT_EQ(f.at({1, 0}), closure(s4, {1, 2}));
  EXPECT_EQ(f.at({2, 0}).size(), 1u);
  EXPECT_EQ(f.at({0, 1}).size(), 1u);
  EXPECT_EQ(f.boundary({1, 0}), f.at({2, 0}));
  EXPECT_EQ(width(f), 2u);
  EXPECT_TRUE(verify_filter_axioms(f));
}

TEST(InitialFilter, SmallExamples) {
  Filter e = initial_filter(library::abelian({3, 3, 3}));
  EXPECT_EQ(e.terms().size(), 2u);
  EXPECT_EQ(width(e), 3u);
  Filter h = initial_filter(library::heisenberg(3));
  ASSERT_EQ(h.terms().size(), 3u);
  EXPECT_EQ(h.terms()[1].subgroup, center(library::heisenberg(3)));
  std::vector<std::size_t> dims;
  for (const auto* l : h.nonzero_layers()) dims.push_back(l->dim);
  EXPECT_EQ(dims, (std::vector<std::size_t>{2, 1}));
  EXPECT_EQ(width(h), 2u);
  EXPECT_EQ(width(initial_filter(library::cyclic(27))), 1u);
}

TEST(InitialFilter, AxiomsAndElementaryLayersOnLibrary) {
  std::vector<Group> gs;
  for (const auto& ng : library::corpus20()) gs.push_back(ng.group);
  gs.push_back(library::symmetric(4));
  gs.push_back(library::symmetric(3));
  gs.push_back(library::dihedral(6));
  gs.push_back(library::cyclic(12));
  for (const auto& g : gs) {
    Filter f = initial_filter(g);
    std::string why;
    EXPECT_TRUE(verify_filter_axioms(f, &why)) << why;
    for (const auto* l : f.nonzero_layers()) {
      EXPECT_TRUE(is_prime(l->p));
      EXPECT_EQ(ipow(l->p, static_cast<unsigned>(l->dim)) * f.terms()[l->term + 1].subgroup.size(),
                f.terms()[l->term].subgroup.size());
    }
  }
}

TEST(Boundary, ChainRule) {
  Filter f = initial_filter(library::cyclic(8));
  // Z8 > Z4 > Z2 > 1 at labels 0, 2, 3, 4
  ASSERT_EQ(f.terms().size(), 4u);
  EXPECT_EQ(f.boundary({1}), f.at({2}));
  EXPECT_EQ(f.boundary({2}), f.at({3}));
  Filter e = initial_filter(library::abelian({2, 2}));
  EXPECT_EQ(e.boundary({1}).size(), 1u);
}

TEST(LayerBimap, AbelianIsZero) {
  Filter f = initial_filter(library::cyclic(9));
  auto t = layer_bimap(f, {1}, {1});
  for (const auto& m : t.mats) EXPECT_TRUE(m.is_zero());
}

TEST(LayerBimap, HeisenbergIsSymplectic) {
  Filter f = initial_filter(library::heisenberg(3));
  auto t = layer_bimap(f, {1}, {1});
  ASSERT_EQ(t.m(), 1u);
  EXPECT_EQ(t.n, 2u);
  EXPECT_TRUE(is_alternating_matrix(t.mats[0]));
  EXPECT_EQ(rank(t.mats[0]), 2u);
  EXPECT_THROW(layer_bimap(f, {2}, {1}), TrivialLayer);
}

TEST(LayerBimap, Bilinear) {
  std::mt19937_64 rng(4);
  for (const Group& g : {library::heisenberg(3), library::dihedral(8), library::dicyclic(4), library::modular(4)}) {
    Filter f = initial_filter(g);
    const Layer* l = f.layer_at({1});
    const Layer* l2 = f.layer_at({2});
    ASSERT_TRUE(l && l2);
    auto t = layer_bimap(f, {1}, {1});
    std::uniform_int_distribution<std::size_t> pick(0, l->space.top.size() - 1);
    auto eval = [&](Elem x, Elem y) {
      Vec u = l->space.vector_of(x), v = l->space.vector_of(y);
      Vec out(t.m(), 0);
      for (std::size_t k = 0; k < t.m(); ++k)
        for (std::size_t a = 0; a < t.n; ++a)
          for (std::size_t b = 0; b < t.n2; ++b) out[k] = (out[k] + u[a] * t.mats[k](a, b) * v[b]) % t.q;
      return out;
    };
    for (int r = 0; r < 200; ++r) {
      Elem x = l->space.top[pick(rng)], x2 = l->space.top[pick(rng)], y = l->space.top[pick(rng)];
      Vec lhs = eval(g.mul(x, x2), y), a = eval(x, y), b = eval(x2, y);
      for (std::size_t k = 0; k < lhs.size(); ++k) EXPECT_EQ(lhs[k], (a[k] + b[k]) % t.q);
      // the matrices agree with commutators in the group
      EXPECT_EQ(eval(x, y), l2->space.vector_of(g.comm(x, y)));
    }
  }
}

TEST(RefineWith, Examples) {
  Group s4 = s4_marked();
  Filter f = initial_filter(s4);
  EXPECT_THROW(refine_with(f, closure(s4, {1})), NotNormal);
  Filter same = refine_with(f, f.at({1, 0}));
  EXPECT_EQ(same.image(), f.image());

  Group e = library::abelian({3, 3, 3});
  Filter fe = initial_filter(e);
  Filter r = refine_with(fe, closure(e, {1}));
  EXPECT_EQ(r.terms().size(), 3u);
  std::vector<std::size_t> dims;
  for (const auto* l : r.nonzero_layers()) dims.push_back(l->dim);
  EXPECT_EQ(dims, (std::vector<std::size_t>{2, 1}));
  EXPECT_TRUE(verify_filter_axioms(r));
}

TEST(RefineWith, NotBetweenLayers) {
  Group z = library::abelian({4, 2});
  Filter fz = initial_filter(z);
  // a cyclic subgroup that is not sandwiched between consecutive terms
  for (Elem a = 1; a < z.order(); ++a) {
    Subgroup c = closure(z, {a});
    bool between = false;
    for (std::size_t i = 0; i + 1 < fz.terms().size(); ++i)
      between = between || (is_subset(fz.terms()[i + 1].subgroup, c) && is_subset(c, fz.terms()[i].subgroup));
    if (!between) {
      EXPECT_THROW(refine_with(fz, c), NotBetweenLayers);
      return;
    }
  }
  FAIL() << "no test subgroup found";
}

TEST(RefineWith, ImageGrowsAndAxiomsHold) {
  std::size_t refinements = 0;
  for (const auto& ng : library::corpus20()) {
    const Group& g = ng.group;
    Filter f = initial_filter(g);
    for (const auto& h : normal_subgroups(g)) {
      std::size_t pos = f.terms().size();
      for (std::size_t i = 0; i + 1 < f.terms().size(); ++i)
        if (is_subset(f.terms()[i + 1].subgroup, h) && is_subset(h, f.terms()[i].subgroup)) pos = i;
      if (pos == f.terms().size()) continue;
      Filter r = refine_with(f, h);
      ++refinements;
      std::string why;
      EXPECT_TRUE(verify_filter_axioms(r, &why)) << ng.name << ": " << why;
      EXPECT_TRUE(image_contains(r, h)) << ng.name;
      for (const auto& t : f.terms()) EXPECT_TRUE(image_contains(r, t.subgroup)) << ng.name;
      if (!image_contains(f, h)) EXPECT_GT(r.terms().size(), f.terms().size());
    }
  }
  EXPECT_GT(refinements, 50u);
}

TEST(Truncate, Examples) {
  Group s4 = s4_marked();
  Filter f = initial_filter(s4);
  auto t = truncate(f, {1, 0});
  EXPECT_EQ(t.quotient.group.order(), 6u);
  EXPECT_TRUE(brute_force_iso_oracle(t.quotient.group, library::symmetric(3)).has_value());
  EXPECT_EQ(t.filter.terms().size(), 2u);
  EXPECT_EQ(t.filter.terms().back().subgroup.size(), 1u);

  Filter h = initial_filter(library::heisenberg(3));
  auto top = truncate(h, h.terms()[1].label);
  EXPECT_EQ(top.filter.terms().size(), 2u);
  EXPECT_EQ(top.quotient.group.order(), 9u);

  auto whole = truncate(h, h.terms().back().label);
  EXPECT_EQ(whole.quotient.group.order(), 27u);
  ASSERT_EQ(whole.filter.terms().size(), h.terms().size());
  for (std::size_t i = 0; i < h.terms().size(); ++i)
    EXPECT_EQ(whole.filter.terms()[i].subgroup.size(), h.terms()[i].subgroup.size());
}
