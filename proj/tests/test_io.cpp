#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "gpiso/io.hpp"
#include "support.hpp"

using namespace gpiso;
using io::json;

TEST(Envelope, RoundTrip) {
  io::Envelope e{io::kFormatVersion, "result", json{{"x", 1}}, 7u, json{{"cap", 10}}};
  EXPECT_EQ(io::parse(io::serialize(e)), e);
  io::Envelope bare{io::kFormatVersion, "tuple", json::array(), {}, {}};
  auto back = io::parse(io::serialize(bare));
  EXPECT_EQ(back, bare);
  EXPECT_FALSE(back.seed.has_value());
  EXPECT_TRUE(back.config.is_null());
}

TEST(Envelope, MalformedInputs) {
  EXPECT_THROW(io::parse("{not json"), InputError);
  EXPECT_THROW(io::parse(R"({"kind":"tuple","payload":{}})"), InputError);
  EXPECT_THROW(io::parse(R"({"format_version":2,"kind":"tuple","payload":{}})"), InputError);
  EXPECT_THROW(io::parse(R"({"format_version":1,"kind":"banana","payload":{}})"), InputError);
  EXPECT_THROW(io::parse(R"({"format_version":1,"kind":"tuple"})"), InputError);
  EXPECT_THROW(io::parse(R"({"format_version":1,"kind":"tuple","payload":{},"seed":"x"})"), InputError);
  EXPECT_THROW(io::read_file("/nonexistent/path.json"), InputError);
}

TEST(Envelope, FileRoundTrip) {
  auto path = std::filesystem::temp_directory_path() / "gpiso_io_test.json";
  auto e = io::tuple_envelope(worked_example_tuple());
  io::write_file(path.string(), e);
  EXPECT_EQ(io::read_file(path.string()), e);
  std::filesystem::remove(path);
}

TEST(TuplePayload, RoundTrip) {
  std::mt19937_64 rng(1);
  for (auto t : {worked_example_tuple(), random_alternating_tuple(4, 3, 5, rng), random_tuple(2, 3, 2, 2, rng)}) {
    auto back = io::tuple_from_payload(io::parse(io::serialize(io::tuple_envelope(t))).payload);
    EXPECT_EQ(back.mats, t.mats);
    EXPECT_EQ(back.n, t.n);
    EXPECT_EQ(back.n2, t.n2);
    EXPECT_EQ(back.q, t.q);
  }
}

TEST(TuplePayload, Rejections) {
  EXPECT_THROW(io::tuple_from_payload(json{{"n", 2}, {"q", 4}, {"mats", json::array()}}), CompositeModulus);
  EXPECT_THROW(io::tuple_from_payload(json{{"n", 2}, {"mats", json::array()}}), InputError);
  json wrong{{"n", 2}, {"q", 3}, {"mats", {{{0, 1, 2}, {2, 0, 1}}}}};
  EXPECT_THROW(io::tuple_from_payload(wrong), ShapeMismatch);
}

TEST(GroupPayload, CayleyRoundTrip) {
  for (const auto& ng : library::corpus20()) {
    auto e = io::parse(io::serialize(io::group_envelope(ng.group)));
    auto back = io::cayley_from_payload(e.payload);
    ASSERT_EQ(back.order(), ng.group.order());
    for (Elem a = 0; a < back.order(); ++a)
      for (Elem b = 0; b < back.order(); ++b) ASSERT_EQ(back.mul(a, b), ng.group.mul(a, b)) << ng.name;
  }
}

TEST(GroupPayload, MatrixAndOtherTypes) {
  auto u = unitriangular_group(3, 3);
  auto p = io::parse(io::serialize(io::group_envelope(u))).payload;
  auto gi = io::group_from_payload(p);
  ASSERT_TRUE(gi.matrix.has_value());
  EXPECT_EQ(gi.matrix->gens, u.gens);
  EXPECT_EQ(io::cayley_from_payload(p).order(), 27u);

  EXPECT_EQ(io::cayley_from_payload(json{{"type", "named"}, {"name", "Heis27"}}).order(), 27u);
  EXPECT_EQ(io::cayley_from_payload(json{{"type", "permutations"}, {"gens", {{1, 2, 0}, {1, 0, 2}}}}).order(), 6u);
  EXPECT_THROW(io::cayley_from_payload(json{{"type", "named"}, {"name", "Monster"}}), InputError);
  EXPECT_THROW(io::cayley_from_payload(json{{"type", "permutations"}, {"gens", {{1, 1, 0}}}}), InputError);
  EXPECT_THROW(io::cayley_from_payload(json{{"type", "cayley"}, {"order", 2}, {"table", {{0, 1}}}}), InputError);
  EXPECT_THROW(io::cayley_from_payload(json{{"type", "cayley"}, {"order", 2}, {"table", {{0, 1}, {1, 5}}}}), InputError);
  EXPECT_THROW(io::cayley_from_payload(json{{"type", "spheres"}}), InputError);
}

TEST(FilterPayload, RoundTrip) {
  auto g = std::make_shared<const Group>(library::dihedral(8));
  auto f = initial_filter(g);
  auto back = io::filter_from_payload(io::parse(io::serialize(io::filter_envelope(f))).payload, g);
  ASSERT_EQ(back.terms().size(), f.terms().size());
  for (std::size_t i = 0; i < f.terms().size(); ++i) {
    EXPECT_EQ(back.terms()[i].label, f.terms()[i].label);
    EXPECT_EQ(back.terms()[i].subgroup, f.terms()[i].subgroup);
  }
  auto other = std::make_shared<const Group>(library::cyclic(8));
  EXPECT_THROW(io::filter_from_payload(io::filter_payload(f), other), InputError);
}

TEST(ColoringPayload, RoundTrip) {
  ColorContext ctx;
  auto r = run_pipeline(library::heisenberg(3), 1, 1, ctx);
  auto rec = io::coloring_record(r.hypergraph, r.coloring);
  EXPECT_EQ(rec.vertices.size(), r.hypergraph.vertices.size());
  EXPECT_EQ(rec.edges.size(), r.hypergraph.edges.size());
  auto back = io::coloring_from_payload(io::parse(io::serialize(io::coloring_envelope(rec))).payload);
  EXPECT_EQ(back, rec);
  EXPECT_THROW(io::coloring_from_payload(json{{"rounds", 1}}), InputError);
}

TEST(ResultEnvelope, EchoesSeedAndConfig) {
  auto e = io::result_envelope(json{{"ok", true}}, 5u, json{{"cap", 3}});
  auto j = io::to_json(e);
  EXPECT_EQ(j.at("kind"), "result");
  EXPECT_EQ(j.at("seed"), 5u);
  EXPECT_EQ(j.at("config").at("cap"), 3);
}
