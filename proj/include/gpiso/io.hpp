#pragma once

// JSON envelopes: {format_version, kind, payload, seed?, config?}.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpiso/bimaps.hpp"
#include "gpiso/error.hpp"
#include "gpiso/filters.hpp"
#include "gpiso/group_library.hpp"
#include "gpiso/groups.hpp"
#include "gpiso/hypergraph.hpp"
#include "gpiso/linalg.hpp"

namespace gpiso::io {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

struct Envelope {
  int format_version = kFormatVersion;
  std::string kind;  // group | tuple | filter | coloring | result
  json payload;
  std::optional<std::uint64_t> seed;
  json config;  // null when absent

  bool operator==(const Envelope&) const = default;
};

inline json to_json(const Envelope& e) {
  json j{{"format_version", e.format_version}, {"kind", e.kind}, {"payload", e.payload}};
  if (e.seed) j["seed"] = *e.seed;
  if (!e.config.is_null()) j["config"] = e.config;
  return j;
}

inline Envelope envelope_from_json(const json& j) {
  try {
    Envelope e;
    e.format_version = j.at("format_version").get<int>();
    if (e.format_version != kFormatVersion) throw InputError("unsupported format_version");
    e.kind = j.at("kind").get<std::string>();
    static const std::vector<std::string> kinds{"group", "tuple", "filter", "coloring", "result"};
    if (std::find(kinds.begin(), kinds.end(), e.kind) == kinds.end()) throw InputError("unknown envelope kind " + e.kind);
    e.payload = j.at("payload");
    if (j.contains("seed")) e.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("config")) e.config = j.at("config");
    return e;
  } catch (const json::exception& ex) {
    throw InputError(std::string("malformed envelope: ") + ex.what());
  }
}

inline std::string serialize(const Envelope& e) { return to_json(e).dump(); }

inline Envelope parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& ex) {
    throw InputError(std::string("invalid JSON: ") + ex.what());
  }
  return envelope_from_json(j);
}

inline Envelope read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

inline void write_file(const std::string& path, const Envelope& e) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << to_json(e).dump(2) << '\n';
}

// ---------------------------------------------------------------- matrices

inline json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(m.row(i));
  return rows;
}

inline Matrix matrix_from_json(const json& j, std::uint32_t q, std::size_t rows = 0, std::size_t cols = 0) {
  auto r = j.get<std::vector<std::vector<std::int64_t>>>();
  if (r.empty()) return Matrix(rows, cols, q);
  Matrix m = Matrix::from_rows(r, q);
  if ((rows && m.rows() != rows) || (cols && m.cols() != cols)) throw ShapeMismatch("matrix has the wrong shape");
  return m;
}

// ---------------------------------------------------------------- tuples

inline json tuple_payload(const MatrixTuple& t) {
  json mats = json::array();
  for (const auto& m : t.mats) mats.push_back(matrix_json(m));
  return {{"n", t.n}, {"n2", t.n2}, {"q", t.q}, {"mats", mats}};
}

inline MatrixTuple tuple_from_payload(const json& p) {
  try {
    const auto n = p.at("n").get<std::size_t>();
    const auto n2 = p.value("n2", n);
    const auto q = p.at("q").get<std::uint32_t>();
    require_prime(q);
    std::vector<Matrix> mats;
    for (const auto& m : p.at("mats")) mats.push_back(matrix_from_json(m, q, n, n2));
    return tuple_of(std::move(mats), n, n2, q);
  } catch (const json::exception& ex) {
    throw InputError(std::string("malformed tuple: ") + ex.what());
  }
}

inline Envelope tuple_envelope(const MatrixTuple& t) { return {kFormatVersion, "tuple", tuple_payload(t), {}, {}}; }

// ---------------------------------------------------------------- groups

struct GroupInput {
  std::optional<Group> cayley;
  std::optional<MatrixGroup> matrix;
};

inline json cayley_payload(const Group& g) {
  json rows = json::array();
  for (Elem a = 0; a < g.order(); ++a) {
    std::vector<std::uint32_t> r(g.order());
    for (Elem b = 0; b < g.order(); ++b) r[b] = g.mul(a, b);
    rows.push_back(r);
  }
  return {{"type", "cayley"}, {"order", g.order()}, {"table", rows}};
}

inline json matrix_group_payload(const MatrixGroup& mg) {
  json gens = json::array();
  for (const auto& m : mg.gens) gens.push_back(matrix_json(m));
  return {{"type", "matrix"}, {"b", mg.b}, {"d", mg.d}, {"gens", gens}};
}

inline Envelope group_envelope(const Group& g) { return {kFormatVersion, "group", cayley_payload(g), {}, {}}; }
inline Envelope group_envelope(const MatrixGroup& g) { return {kFormatVersion, "group", matrix_group_payload(g), {}, {}}; }

inline Group named_group(const std::string& name) {
  for (auto& ng : library::corpus20())
    if (ng.name == name) return std::move(ng.group);
  if (name == "S3") return library::symmetric(3);
  if (name == "S4") return library::symmetric(4);
  if (name == "Z6") return library::cyclic(6);
  throw InputError("unknown group name " + name);
}

// Payload types: cayley (table), matrix (b, d, gens), permutations (gens), named (name).
inline GroupInput group_from_payload(const json& p) {
  try {
    GroupInput out;
    const auto type = p.at("type").get<std::string>();
    if (type == "cayley") {
      const auto n = p.at("order").get<std::size_t>();
      auto rows = p.at("table").get<std::vector<std::vector<std::uint32_t>>>();
      if (rows.size() != n || n == 0 || n > 65535) throw InputError("table size does not match order");
      std::vector<std::uint16_t> t;
      for (const auto& r : rows) {
        if (r.size() != n) throw InputError("ragged multiplication table");
        for (auto x : r) {
          if (x >= n) throw InputError("table entry out of range");
          t.push_back(static_cast<std::uint16_t>(x));
        }
      }
      out.cayley = Group(n, std::move(t));
    } else if (type == "matrix") {
      MatrixGroup mg;
      mg.b = p.at("b").get<std::uint32_t>();
      mg.d = p.at("d").get<std::size_t>();
      for (const auto& m : p.at("gens")) mg.gens.push_back(matrix_from_json(m, mg.b, mg.d, mg.d));
      out.matrix = std::move(mg);
    } else if (type == "permutations") {
      auto gens = p.at("gens").get<std::vector<library::Perm>>();
      for (const auto& g : gens) {
        std::vector<std::uint32_t> s = g;
        std::sort(s.begin(), s.end());
        for (std::size_t i = 0; i < s.size(); ++i)
          if (s[i] != i || g.size() != gens[0].size()) throw InputError("not a permutation of 0..n-1");
      }
      out.cayley = library::from_permutations(gens);
    } else if (type == "named") {
      out.cayley = named_group(p.at("name").get<std::string>());
    } else {
      throw InputError("unknown group type " + type);
    }
    return out;
  } catch (const json::exception& ex) {
    throw InputError(std::string("malformed group: ") + ex.what());
  }
}

// Cayley group from any payload; matrix groups are closed up to the cap.
inline Group cayley_from_payload(const json& p, std::size_t cap = kCayleyCap) {
  auto gi = group_from_payload(p);
  if (gi.cayley) return std::move(*gi.cayley);
  return cayley_of(*gi.matrix, cap);
}

// ---------------------------------------------------------------- filters

inline json filter_payload(const Filter& f) {
  json terms = json::array(), layers = json::array();
  for (const auto& t : f.terms()) terms.push_back({{"label", t.label}, {"subgroup", t.subgroup}});
  for (const auto& l : f.layers()) layers.push_back({{"label", l.label}, {"p", l.p}, {"dim", l.dim}});
  return {{"dim", f.dim()}, {"order", f.group().order()}, {"terms", terms}, {"layers", layers}};
}

inline Filter filter_from_payload(const json& p, std::shared_ptr<const Group> g) {
  try {
    if (p.at("order").get<std::size_t>() != g->order()) throw InputError("filter belongs to a group of another order");
    std::vector<FilterTerm> terms;
    for (const auto& t : p.at("terms"))
      terms.push_back({t.at("label").get<Label>(), t.at("subgroup").get<Subgroup>()});
    return Filter(std::move(g), p.at("dim").get<std::size_t>(), std::move(terms));
  } catch (const json::exception& ex) {
    throw InputError(std::string("malformed filter: ") + ex.what());
  }
}

inline Envelope filter_envelope(const Filter& f) { return {kFormatVersion, "filter", filter_payload(f), {}, {}}; }

// ---------------------------------------------------------------- colorings

struct ColoringRecord {
  struct Vertex {
    Label layer;
    Vec point;
    std::uint32_t color = 0;
    bool operator==(const Vertex&) const = default;
  };
  struct Edge {
    std::uint64_t kind = 0;
    std::vector<std::size_t> members;
    std::uint32_t color = 0;
    bool operator==(const Edge&) const = default;
  };
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;
  std::size_t rounds = 0;
  bool operator==(const ColoringRecord&) const = default;
};

inline ColoringRecord coloring_record(const ColoredHypergraph& h, const StableColoring& sc) {
  ColoringRecord r;
  r.rounds = sc.rounds;
  for (std::size_t v = 0; v < h.vertices.size(); ++v)
    r.vertices.push_back({h.gs.layers[h.vertices[v].layer].label, h.vertices[v].point, sc.vertex_colors[v]});
  for (std::size_t e = 0; e < h.edges.size(); ++e)
    r.edges.push_back({static_cast<std::uint64_t>(h.edges[e].kind), h.edges[e].members, sc.edge_colors[e]});
  return r;
}

inline json coloring_payload(const ColoringRecord& r) {
  json vs = json::array(), es = json::array();
  for (const auto& v : r.vertices) vs.push_back({{"layer", v.layer}, {"point", v.point}, {"color", v.color}});
  for (const auto& e : r.edges) es.push_back({{"kind", e.kind}, {"members", e.members}, {"color", e.color}});
  return {{"rounds", r.rounds}, {"vertices", vs}, {"edges", es}};
}

inline ColoringRecord coloring_from_payload(const json& p) {
  try {
    ColoringRecord r;
    r.rounds = p.at("rounds").get<std::size_t>();
    for (const auto& v : p.at("vertices"))
      r.vertices.push_back({v.at("layer").get<Label>(), v.at("point").get<Vec>(), v.at("color").get<std::uint32_t>()});
    for (const auto& e : p.at("edges"))
      r.edges.push_back({e.at("kind").get<std::uint64_t>(), e.at("members").get<std::vector<std::size_t>>(),
                         e.at("color").get<std::uint32_t>()});
    return r;
  } catch (const json::exception& ex) {
    throw InputError(std::string("malformed coloring: ") + ex.what());
  }
}

inline Envelope coloring_envelope(const ColoringRecord& r) { return {kFormatVersion, "coloring", coloring_payload(r), {}, {}}; }

inline Envelope result_envelope(json payload, std::optional<std::uint64_t> seed = {}, json config = {}) {
  return {kFormatVersion, "result", std::move(payload), seed, std::move(config)};
}

}  // namespace gpiso::io
