// gpiso: command-line front end.
//
// Exit codes: 0 success / positive decision, 1 negative decision,
// 2 GenericFail or a cap was hit, 3 input or usage error.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "gpiso/gpiso.hpp"
#include "gpiso/io.hpp"

namespace {

using namespace gpiso;
using json = io::json;

constexpr int kOk = 0;
constexpr int kNegative = 1;
constexpr int kUndecided = 2;
constexpr int kInput = 3;

struct Common {
  std::uint64_t seed = 1;
  std::string out;
  std::size_t cap = 1'000'000;
  std::size_t jobs = 1;  // accepted for compatibility; every loop runs sequentially
  std::size_t g = 1;
  std::size_t k = 1;
};

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void emit(const Common& c, const io::Envelope& e) {
  if (c.out.empty()) {
    std::cout << io::to_json(e).dump(2) << '\n';
  } else {
    io::write_file(c.out, e);
  }
}

io::Envelope with_echo(io::Envelope e, const Common& c, json config) {
  e.seed = c.seed;
  config["cap"] = c.cap;
  config["jobs"] = c.jobs;
  e.config = std::move(config);
  return e;
}

io::Envelope load(const std::string& path, const std::string& kind) {
  auto e = io::read_file(path);
  if (e.kind != kind) throw InputError(path + ": expected a " + kind + " envelope, got " + e.kind);
  return e;
}

Group load_group(const std::string& path) { return io::cayley_from_payload(load(path, "group").payload); }

MatrixTuple load_tuple(const std::string& path) { return io::tuple_from_payload(load(path, "tuple").payload); }

json filter_summary(const Filter& f) {
  json rows = json::array();
  for (const auto& t : f.terms()) {
    const Layer* l = f.layer_at(t.label);
    json r{{"label", t.label}, {"order", t.subgroup.size()}};
    if (l) r["layer"] = {{"p", l->p}, {"dim", l->dim}};
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------- sample

struct SampleArgs {
  std::uint32_t b = 3;
  std::size_t d = 10, gens = 5, count = 100;
  double density = 0.1;
  std::optional<std::size_t> support;
};

int run_sample(const Common& c, const SampleArgs& a) {
  SamplerConfig cfg;
  cfg.b = a.b;
  cfg.d = a.d;
  cfg.gens = a.gens;
  cfg.seed = c.seed;
  if (a.support) {
    cfg.law = SamplingLaw::FixedSupport;
    cfg.support_size = *a.support;
  } else {
    cfg.density = a.density;
  }
  cfg.validate();
  auto t0 = std::chrono::steady_clock::now();
  auto hist = order_histogram(cfg, a.count);
  std::ostringstream csv;
  csv << "log_order,count\n";
  json h = json::array();
  for (const auto& [lo, n] : hist) {
    csv << lo << ',' << n << '\n';
    h.push_back({{"log_order", lo}, {"count", n}});
  }
  json config{{"b", a.b}, {"d", a.d}, {"gens", a.gens}, {"count", a.count}};
  if (a.support) config["support_size"] = *a.support;
  else config["density"] = a.density;
  auto env = with_echo(io::result_envelope({{"histogram", h}, {"timing_ms", ms_since(t0)}}), c, config);
  if (c.out.empty()) {
    std::cout << csv.str();
    return kOk;
  }
  std::filesystem::create_directories(c.out);
  std::ofstream(std::filesystem::path(c.out) / "histogram.csv") << csv.str();
  io::write_file((std::filesystem::path(c.out) / "sample.json").string(), env);
  return kOk;
}

// ---------------------------------------------------------------- filter / wl / stats

int run_filter(const Common& c, const std::string& group, bool refine) {
  auto gp = std::make_shared<const Group>(load_group(group));
  Filter f;
  json extra;
  if (refine) {
    ColorContext ctx;
    auto r = run_pipeline(gp, c.g, c.k, ctx);
    f = r.filter;
    extra = {{"iterations", r.iterations}, {"refinements", r.refinements}, {"axioms_held", r.axioms_held}};
  } else {
    f = initial_filter(gp);
  }
  for (const auto& row : filter_summary(f)) std::cerr << row.dump() << '\n';
  auto env = io::filter_envelope(f);
  if (!extra.is_null()) env.payload["pipeline"] = extra;
  emit(c, with_echo(env, c, {{"g", c.g}, {"k", c.k}, {"refine", refine}}));
  return kOk;
}

int run_wl(const Common& c, const std::string& group, const std::string& tuple, bool emit_colors) {
  ColorContext ctx;
  ColoredHypergraph h;
  StableColoring sc;
  if (!tuple.empty()) {
    h = build_hypergraph(graded_from_tuple(load_tuple(tuple)), c.g, ctx);
    sc = wl_refine(incidence_graph(h, ctx), c.k, ctx);
  } else {
    auto r = run_pipeline(std::make_shared<const Group>(load_group(group)), c.g, c.k, ctx);
    h = std::move(r.hypergraph);
    sc = std::move(r.coloring);
  }
  if (emit_colors) std::cerr << dump_coloring(h, sc);
  emit(c, with_echo(io::coloring_envelope(io::coloring_record(h, sc)), c, {{"g", c.g}, {"k", c.k}}));
  return kOk;
}

int run_stats(const Common& c, const std::string& group) {
  ColorContext ctx;
  auto r = run_pipeline(std::make_shared<const Group>(load_group(group)), c.g, c.k, ctx);
  auto st = stats(r.filter, r.hypergraph, r.coloring);
  json p{{"width", st.width}, {"color_ratio", st.color_ratio}, {"layer_dims", st.layer_dims},
         {"class_sizes", st.class_sizes}, {"filter", filter_summary(r.filter)}};
  emit(c, with_echo(io::result_envelope(p), c, {{"g", c.g}, {"k", c.k}}));
  return kOk;
}

// ---------------------------------------------------------------- iso

int run_iso(const Common& c, const std::string& a, const std::string& b, const std::string& strategy, bool no_colors) {
  IsoConfig cfg;
  cfg.g = c.g;
  cfg.k = c.k;
  cfg.cap = c.cap;
  cfg.use_colors = !no_colors;
  if (strategy == "ir") cfg.strategy = SearchStrategy::IR;
  else if (strategy != "series") throw InputError("unknown strategy " + strategy);
  auto t0 = std::chrono::steady_clock::now();
  auto r = isomorphism_test(load_group(a), load_group(b), cfg);
  json p{{"isomorphic", r.isomorphic()},
         {"series_enumerated", r.series_enumerated},
         {"series_candidates", r.series_candidates},
         {"rejected_by_signature", r.rejected_by_signature},
         {"timing_ms", ms_since(t0)}};
  if (r.witness) p["witness"] = r.witness->map;
  emit(c, with_echo(io::result_envelope(p), c,
                    {{"g", c.g}, {"k", c.k}, {"strategy", strategy}, {"use_colors", cfg.use_colors}}));
  return r.isomorphic() ? kOk : kNegative;
}

// ---------------------------------------------------------------- pisom

struct PisomArgs {
  std::string a, b, mode = "adj";
  std::size_t c = 3;
  std::optional<unsigned> s_exp;
  bool low_rank = false;
};

int run_pisom(const Common& c, const PisomArgs& a) {
  PisomConfig cfg;
  cfg.c = a.c;
  cfg.cap = c.cap;
  if (a.mode == "aut") cfg.mode = PisomMode::Autometry;
  else if (a.mode != "adj") throw InputError("mode must be aut or adj");
  if (a.low_rank) cfg.heuristics = PisomHeuristic::LowRank;
  auto g = load_tuple(a.a);
  auto h = load_tuple(a.b);
  if (a.s_exp) cfg.s = ipow(g.q, *a.s_exp);
  auto t0 = std::chrono::steady_clock::now();
  auto r = pseudo_isometries(g, h, cfg);
  json wit = json::array();
  for (const auto& t : r.pseudo_isometries) wit.push_back(io::matrix_json(t));
  json p{{"outcome", r.decided() ? "Decided" : "GenericFail"},
         {"count", r.pseudo_isometries.size()},
         {"segment", r.segment},
         {"tuples_enumerated", r.tuples_enumerated},
         {"timing_ms", ms_since(t0)}};
  if (r.decided()) p["witnesses"] = wit;
  json config{{"c", a.c}, {"mode", a.mode}, {"low_rank", a.low_rank}};
  if (a.s_exp) config["s_exp"] = *a.s_exp;
  emit(c, with_echo(io::result_envelope(p), c, config));
  if (!r.decided()) return kUndecided;
  return r.pseudo_isometries.empty() ? kNegative : kOk;
}

// ---------------------------------------------------------------- construct

struct ConstructArgs {
  std::string kind, tuple, name;
  std::size_t d = 3, n = 4, m = 3;
  std::uint32_t p = 3;
};

int run_construct(const Common& c, const ConstructArgs& a) {
  json config{{"kind", a.kind}};
  io::Envelope env;
  if (a.kind == "brahana" || a.kind == "baer") {
    auto t = load_tuple(a.tuple);
    env = io::group_envelope(a.kind == "baer" ? baer_group(t) : brahana_group(t));
  } else if (a.kind == "named") {
    env = io::group_envelope(io::named_group(a.name));
    config["name"] = a.name;
  } else if (a.kind == "unitriangular") {
    env = io::group_envelope(unitriangular_group(a.d, a.p));
    config["d"] = a.d;
    config["p"] = a.p;
  } else if (a.kind == "random-tuple") {
    require_prime(a.p);
    std::mt19937_64 rng(c.seed);
    env = io::tuple_envelope(random_alternating_tuple(a.n, a.m, a.p, rng));
    config["n"] = a.n;
    config["m"] = a.m;
    config["q"] = a.p;
  } else if (a.kind == "worked-tuple") {
    env = io::tuple_envelope(worked_example_tuple());
  } else {
    throw InputError("unknown construct kind " + a.kind);
  }
  emit(c, with_echo(env, c, config));
  return kOk;
}

// ---------------------------------------------------------------- replay

int run_replay(const Common& c, bool golden) {
  if (!golden) throw InputError("replay-example needs --golden");
  auto r = replay_worked_example();
  std::cerr << r.dump;
  json p{{"matches", r.matches()},           {"initial_ranks", r.initial_ranks}, {"round1_points", r.round1_points},
         {"round2_duals", r.round2_duals}, {"stable", r.stable},               {"rounds", r.rounds}};
  emit(c, with_echo(io::result_envelope(p), c, {{"example", "worked-genus-1"}}));
  return r.matches() ? kOk : kNegative;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p-group isomorphism toolkit"};
  app.require_subcommand(1);
  Common c;
  auto common = [&](CLI::App* s) {
    s->add_option("--seed", c.seed, "random seed");
    s->add_option("--out", c.out, "output path");
    s->add_option("--cap", c.cap, "enumeration cap");
    s->add_option("--jobs", c.jobs, "worker count (results do not depend on it)");
  };
  auto genus = [&](CLI::App* s) {
    s->add_option("--g", c.g, "genus bound")->check(CLI::Range(1, 8));
    s->add_option("--k", c.k, "WL dimension")->check(CLI::Range(1, 2));
  };

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "random unitriangular groups, histogram of log_b order");
  common(sample);
  sample->add_option("--b", sa.b);
  sample->add_option("--d", sa.d);
  sample->add_option("--gens", sa.gens);
  sample->add_option("--count", sa.count);
  auto* dens = sample->add_option("--density", sa.density);
  auto* supp = sample->add_option("--support-size", sa.support);
  dens->excludes(supp);

  std::string group, tuple, a, b, strategy = "series";
  bool refine = false, emit_colors = false, no_colors = false, golden = false;

  auto* filter = app.add_subcommand("filter", "initial (or refined) characteristic filter of a group");
  common(filter);
  genus(filter);
  filter->add_option("--group", group)->required();
  filter->add_flag("--refine", refine, "run the refinement pipeline");

  auto* wl = app.add_subcommand("wl", "stable coloring of the layer hypergraph");
  common(wl);
  genus(wl);
  auto* wg = wl->add_option("--group", group);
  auto* wt = wl->add_option("--tuple", tuple, "graded structure of a single bimap");
  wg->excludes(wt);
  wl->add_flag("--emit-colors", emit_colors, "print the coloring trace to stderr");

  auto* iso = app.add_subcommand("iso", "isomorphism test of two p-groups");
  common(iso);
  genus(iso);
  iso->add_option("--a", a)->required();
  iso->add_option("--b", b)->required();
  iso->add_option("--strategy", strategy)->check(CLI::IsMember({"series", "ir"}));
  iso->add_flag("--no-colors", no_colors, "ignore colors when matching series");

  PisomArgs pa;
  auto* pisom = app.add_subcommand("pisom", "pseudo-isometries of alternating tuples");
  common(pisom);
  pisom->add_option("--a", pa.a)->required();
  pisom->add_option("--b", pa.b)->required();
  pisom->add_option("--c", pa.c)->check(CLI::PositiveNumber);
  pisom->add_option("--s-exp", pa.s_exp, "s = q^s_exp (default q^n)");
  pisom->add_option("--mode", pa.mode)->check(CLI::IsMember({"aut", "adj"}));
  pisom->add_flag("--low-rank", pa.low_rank);

  auto* st = app.add_subcommand("stats", "width, color ratio and class sizes after refinement");
  common(st);
  genus(st);
  st->add_option("--group", group)->required();

  ConstructArgs ca;
  auto* cons = app.add_subcommand("construct", "write a group or tuple envelope");
  common(cons);
  cons->add_option("--kind", ca.kind)
      ->required()
      ->check(CLI::IsMember({"brahana", "baer", "named", "unitriangular", "random-tuple", "worked-tuple"}));
  cons->add_option("--tuple", ca.tuple);
  cons->add_option("--name", ca.name);
  cons->add_option("--d", ca.d);
  cons->add_option("--p", ca.p, "prime (field size for random-tuple)");
  cons->add_option("--n", ca.n);
  cons->add_option("--m", ca.m);

  auto* replay = app.add_subcommand("replay-example", "replay the worked genus-1 coloring");
  common(replay);
  replay->add_flag("--golden", golden, "compare against the embedded partition");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInput;
  }

  try {
    if (*sample) return run_sample(c, sa);
    if (*filter) return run_filter(c, group, refine);
    if (*wl) {
      if (group.empty() && tuple.empty()) throw InputError("wl needs --group or --tuple");
      return run_wl(c, group, tuple, emit_colors);
    }
    if (*iso) return run_iso(c, a, b, strategy, no_colors);
    if (*pisom) return run_pisom(c, pa);
    if (*st) return run_stats(c, group);
    if (*cons) return run_construct(c, ca);
    if (*replay) return run_replay(c, golden);
  } catch (const CapExceeded& e) {
    std::cerr << e.what() << '\n';
    return kUndecided;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kInput;
  }
  return kInput;
}
