#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "minlp/bench.hpp"
#include "minlp/model_json.hpp"

using namespace minlp;
namespace fs = std::filesystem;

TEST_CASE("config labels parse to solver options") {
  auto c = bench::parseConfigLabel("C-OA(r)");
  CHECK(c.options.algorithm == Algorithm::OA);
  CHECK(c.options.convexify);
  CHECK(c.options.subproblem_scale == SubproblemScale::Reduced);
  auto d = bench::parseConfigLabel("GLP/NLP-B&B");
  CHECK(d.options.algorithm == Algorithm::GLpNlpBB);
  CHECK(!d.options.convexify);
  auto e = bench::parseConfigLabel("C-goa(c)");
  CHECK(e.options.algorithm == Algorithm::GOA);
  CHECK(e.options.subproblem_scale == SubproblemScale::Complete);
  CHECK_THROWS_AS(bench::parseConfigLabel("MAGIC"), ParseError);
}

TEST_CASE("generation is deterministic") {
  auto a = bench::generateInstances(false, 4, 99, "");
  auto b = bench::generateInstances(false, 4, 99, "");
  REQUIRE(a.size() == 4);
  REQUIRE(b.size() == 4);
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(writeModelJson(a[i].model) == writeModelJson(b[i].model));
    CHECK(a[i].oracle == b[i].oracle);
  }
}

TEST_CASE("oracle values are reproduced by a fresh enumeration") {
  auto gen = bench::generateInstances(true, 3, 123, "");
  for (const auto& gi : gen) {
    double again = bench::enumerationOracle(gi.model);
    CHECK(again == doctest::Approx(gi.oracle).epsilon(1e-6));
  }
}

TEST_CASE("oracle agrees with hand-solved instances") {
  // min (x-2)^2 + 0.5 y, x <= 1 + 2y: enumerate y -> best 0.5 at y=1.
  ModelBuilder mb;
  VarId x = mb.addVar("x", Domain::Continuous, 0.0, 4.0);
  VarId y = mb.addVar("y", Domain::Binary, 0.0, 1.0);
  auto& g = mb.graph();
  mb.setObjective(g.sum({{1.0, g.pow(g.sum({{1.0, g.var(x)}}, -2.0), 2)},
                         {0.5, g.var(y)}}));
  mb.addConstraint(g.sum({{1.0, g.var(x)}, {-2.0, g.var(y)}}, -1.0),
                   Sense::Leq, 0.0);
  Point arg;
  double v = bench::enumerationOracle(mb.build(), &arg);
  CHECK(v == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(arg[1] == doctest::Approx(1.0));
}

TEST_CASE("benchmark produces the full cross product deterministically") {
  fs::path dir = fs::temp_directory_path() / "minlp_bench_test";
  fs::create_directories(dir);
  auto gen = bench::generateInstances(false, 3, 77, dir.string());
  std::vector<std::string> files;
  for (const auto& gi : gen) files.push_back((dir / gi.file).string());
  std::vector<bench::RunConfig> cfgs = {bench::parseConfigLabel("OA"),
                                        bench::parseConfigLabel("C-OA(r)")};
  auto rows = bench::runBench(files, cfgs, 30.0, true);
  REQUIRE(rows.size() == 6);
  for (const auto& r : rows) {
    CHECK(r.status == "optimal");
    // Objectives match the stored oracle values.
    for (const auto& gi : gen)
      if (r.instance == gi.file)
        CHECK(r.objective == doctest::Approx(gi.oracle).epsilon(1e-3));
  }
  // Serial rerun yields the same rows except the timing column.
  auto rows2 = bench::runBench(files, cfgs, 30.0, false);
  REQUIRE(rows2.size() == rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].instance == rows2[i].instance);
    CHECK(rows[i].config == rows2[i].config);
    CHECK(rows[i].status == rows2[i].status);
    CHECK(rows[i].objective == doctest::Approx(rows2[i].objective));
    CHECK(rows[i].iterations == rows2[i].iterations);
  }
  fs::remove_all(dir);
}

TEST_CASE("csv round trip") {
  std::vector<bench::RunRecord> rows = {
      {"a.json", "OA", "optimal", -1.25, -1.25, -1.25, 3, 0.01},
      {"b.json", "GOA", "time-limit", kInf, -2.0, kInf, 9, 60.0},
  };
  std::ostringstream os;
  bench::writeRunCsv(os, rows);
  std::string text = os.str();
  CHECK(text.rfind("instance,config,status,objective,lb,ub,iterations,time_s",
                   0) == 0);
  std::istringstream is(text);
  auto back = bench::readRunCsv(is);
  REQUIRE(back.size() == 2);
  CHECK(back[0].objective == doctest::Approx(-1.25));
  CHECK(back[1].objective == kInf);
  CHECK(back[1].lb == doctest::Approx(-2.0));
  CHECK(back[1].status == "time-limit");
}

TEST_CASE("performance profile on a hand-computed example") {
  // Times A = (1,2,4), B = (2,3,2): ratios A = (1,1,2), B = (2,1.5,1).
  // At ratio 1 A is fastest on 2/3 of instances, B on 1/3.
  std::vector<bench::RunRecord> rows;
  const double ta[3] = {1.0, 2.0, 4.0}, tb[3] = {2.0, 3.0, 2.0};
  for (int i = 0; i < 3; ++i) {
    std::string inst = "i" + std::to_string(i) + ".json";
    rows.push_back({inst, "A", "optimal", 0.0, 0.0, 0.0, 1, ta[i]});
    rows.push_back({inst, "B", "optimal", 0.0, 0.0, 0.0, 1, tb[i]});
  }
  bench::ProfileTable t = bench::computeProfile(rows, /*metric_time=*/true);
  REQUIRE(t.configs.size() == 2);
  REQUIRE(!t.ratios.empty());
  CHECK(t.ratios.front() == doctest::Approx(1.0));
  int ia = t.configs[0] == "A" ? 0 : 1;
  int ib = 1 - ia;
  CHECK(t.fractions.front()[ia] == doctest::Approx(2.0 / 3.0));
  CHECK(t.fractions.front()[ib] == doctest::Approx(1.0 / 3.0));
  // Everyone reaches 1.0 at the largest ratio.
  CHECK(t.fractions.back()[ia] == doctest::Approx(1.0));
  CHECK(t.fractions.back()[ib] == doctest::Approx(1.0));
}

TEST_CASE("single config profile is a step to one") {
  std::vector<bench::RunRecord> rows = {
      {"a.json", "OA", "optimal", 0.0, 0.0, 0.0, 1, 0.5},
      {"b.json", "OA", "optimal", 0.0, 0.0, 0.0, 1, 2.0},
      {"c.json", "OA", "infeasible", kInf, -kInf, kInf, 0, 1.0},
  };
  bench::ProfileTable t = bench::computeProfile(rows, true);
  REQUIRE(t.configs.size() == 1);
  // Two of three rows are solved; the unsolved one never appears.
  CHECK(t.fractions.front()[0] == doctest::Approx(2.0 / 3.0));
  CHECK(t.fractions.back()[0] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("dominating config majorizes the profile pointwise") {
  std::vector<bench::RunRecord> rows;
  for (int i = 0; i < 4; ++i) {
    std::string inst = "i" + std::to_string(i) + ".json";
    rows.push_back({inst, "fast", "optimal", 0.0, 0.0, 0.0, 1, 1.0 + i});
    rows.push_back({inst, "slow", "optimal", 0.0, 0.0, 0.0, 1, 2.0 * (1.0 + i)});
  }
  bench::ProfileTable t = bench::computeProfile(rows, true);
  int f = t.configs[0] == "fast" ? 0 : 1;
  for (const auto& row : t.fractions) CHECK(row[f] >= row[1 - f] - 1e-12);
}

TEST_CASE("iteration-count metric uses the iterations column") {
  std::vector<bench::RunRecord> rows = {
      {"a.json", "A", "optimal", 0.0, 0.0, 0.0, 2, 50.0},
      {"a.json", "B", "optimal", 0.0, 0.0, 0.0, 6, 1.0},
  };
  bench::ProfileTable t = bench::computeProfile(rows, /*metric_time=*/false);
  int ia = t.configs[0] == "A" ? 0 : 1;
  // A needs fewer iterations despite being slower.
  CHECK(t.fractions.front()[ia] == doctest::Approx(1.0));
}
