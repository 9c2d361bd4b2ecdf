#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gpiso/io.hpp"
#include "support.hpp"

#ifndef GPISO_CLI_PATH
#error "GPISO_CLI_PATH must point at the gpiso executable"
#endif

namespace fs = std::filesystem;
using namespace gpiso;

namespace {

fs::path scratch() {
  static fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("gpiso_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args, std::string* out = nullptr) {
  const fs::path captured = scratch() / "stdout.txt";
  const std::string cmd = std::string(GPISO_CLI_PATH) + " " + args + " > " + captured.string() + " 2> /dev/null";
  const int status = std::system(cmd.c_str());
  if (out) {
    std::ifstream in(captured);
    std::stringstream ss;
    ss << in.rdbuf();
    *out = ss.str();
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string write_envelope(const std::string& name, const io::Envelope& e) {
  auto p = (scratch() / name).string();
  io::write_file(p, e);
  return p;
}

}  // namespace

TEST(Cli, ReplayGolden) {
  std::string out;
  EXPECT_EQ(run("replay-example --golden", &out), 0);
  auto e = io::parse(out);
  EXPECT_EQ(e.kind, "result");
  EXPECT_TRUE(e.payload.at("matches").get<bool>());
  EXPECT_TRUE(e.seed.has_value());
  EXPECT_TRUE(e.config.contains("cap"));
}

TEST(Cli, IsoExitCodes) {
  auto z9 = write_envelope("z9.json", io::group_envelope(library::cyclic(9)));
  auto z33 = write_envelope("z33.json", io::group_envelope(library::abelian({3, 3})));
  std::mt19937_64 rng(1);
  auto d8r = write_envelope("d8r.json", io::group_envelope(gpiso::testing::relabeled(library::dihedral(8), rng)));
  auto d8 = write_envelope("d8.json", io::group_envelope(library::dihedral(8)));
  EXPECT_EQ(run("iso --a " + z9 + " --b " + z33), 1);
  std::string out;
  EXPECT_EQ(run("iso --a " + d8 + " --b " + d8r, &out), 0);
  EXPECT_TRUE(io::parse(out).payload.at("isomorphic").get<bool>());
  EXPECT_EQ(run("iso --strategy ir --a " + d8 + " --b " + d8r), 0);
  EXPECT_EQ(run("iso --no-colors --a " + z9 + " --b " + z33), 1);
}

TEST(Cli, PisomMatchesOracle) {
  std::mt19937_64 rng(2);
  auto g = random_alternating_tuple(4, 3, 3, rng);
  auto h = recombine(transform(g, random_invertible(4, 3, rng)), random_invertible(3, 3, rng));
  auto ga = write_envelope("g.json", io::tuple_envelope(g));
  auto hb = write_envelope("h.json", io::tuple_envelope(h));
  std::string out;
  EXPECT_EQ(run("pisom --a " + ga + " --b " + hb, &out), 0);
  auto e = io::parse(out);
  EXPECT_EQ(e.payload.at("outcome"), "Decided");
  EXPECT_EQ(e.payload.at("count").get<std::size_t>(), pseudo_isometry_bruteforce(g, h).size());

  // different span dimensions: decided, empty
  auto k = g;
  k.mats[2] = k.mats[0];
  auto kb = write_envelope("k.json", io::tuple_envelope(k));
  EXPECT_EQ(run("pisom --a " + ga + " --b " + kb), 1);

  auto z = write_envelope("zero.json", io::tuple_envelope(zero_tuple(4, 3, 3)));
  EXPECT_EQ(run("pisom --a " + z + " --b " + z, &out), 2);
  EXPECT_EQ(io::parse(out).payload.at("outcome"), "GenericFail");
}

TEST(Cli, BadInput) {
  auto bad = (scratch() / "bad.json").string();
  std::ofstream(bad) << "{not json";
  auto z9 = write_envelope("z9b.json", io::group_envelope(library::cyclic(9)));
  EXPECT_EQ(run("iso --a " + bad + " --b " + z9), 3);
  EXPECT_EQ(run("iso --a /nonexistent.json --b " + z9), 3);
  EXPECT_EQ(run("pisom --a " + z9 + " --b " + z9), 3);
  EXPECT_EQ(run("sample --density 2"), 3);
  EXPECT_EQ(run("wl --k 3 --group " + z9), 3);
  EXPECT_EQ(run("no-such-command"), 3);
  EXPECT_EQ(run(""), 3);
}

TEST(Cli, SampleCsvAndFiles) {
  std::string out;
  EXPECT_EQ(run("sample --b 3 --d 6 --gens 3 --count 7 --density 0.3 --seed 5", &out), 0);
  std::istringstream in(out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "log_order,count");
  std::size_t total = 0;
  while (std::getline(in, line))
    if (!line.empty()) total += std::stoul(line.substr(line.find(',') + 1));
  EXPECT_EQ(total, 7u);

  auto dir = scratch() / "sample_out";
  EXPECT_EQ(run("sample --b 3 --d 5 --count 3 --out " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "histogram.csv"));
  auto e = io::read_file((dir / "sample.json").string());
  EXPECT_EQ(e.seed, 1u);
}

TEST(Cli, FilterWlStatsConstruct) {
  auto heis = write_envelope("heis.json", io::group_envelope(library::heisenberg(3)));
  std::string out;
  EXPECT_EQ(run("filter --group " + heis, &out), 0);
  EXPECT_EQ(io::parse(out).kind, "filter");
  EXPECT_EQ(run("filter --refine --group " + heis, &out), 0);
  EXPECT_EQ(run("wl --group " + heis, &out), 0);
  EXPECT_EQ(io::parse(out).kind, "coloring");
  EXPECT_EQ(run("wl --k 2 --group " + heis), 0);
  auto wt = (scratch() / "wt.json").string();
  EXPECT_EQ(run("construct --kind worked-tuple --out " + wt), 0);
  EXPECT_EQ(io::tuple_from_payload(io::read_file(wt).payload).mats, worked_example_tuple().mats);
  EXPECT_EQ(run("wl --tuple " + wt, &out), 0);
  EXPECT_EQ(run("stats --group " + heis, &out), 0);
  EXPECT_EQ(io::parse(out).payload.at("width"), 2);
  auto baer = (scratch() / "baer.json").string();
  EXPECT_EQ(run("construct --kind baer --tuple " + wt + " --out " + baer), 0);
  EXPECT_EQ(io::cayley_from_payload(io::read_file(baer).payload).order(), 2187u);
}
