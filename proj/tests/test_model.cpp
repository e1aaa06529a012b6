#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "minlp/model_json.hpp"
#include "minlp/nlp.hpp"

using namespace minlp;

namespace {

// min (x-2)^2 + 0.5 y  s.t.  x <= 1 + 2y,  x in [0,4], y binary.
Model tinyMixed() {
  ModelBuilder mb("tiny");
  VarId x = mb.addVar("x", Domain::Continuous, 0.0, 4.0);
  VarId y = mb.addVar("y", Domain::Binary, 0.0, 1.0);
  auto& g = mb.graph();
  int obj = g.sum({{1.0, g.pow(g.sum({{1.0, g.var(x)}}, -2.0), 2)},
                   {0.5, g.var(y)}});
  mb.setObjective(obj);
  mb.addConstraint(g.sum({{1.0, g.var(x)}, {-2.0, g.var(y)}}, -1.0),
                   Sense::Leq, 0.0);
  mb.setConvexity(Convexity::DeclaredConvex);
  return mb.build();
}

}  // namespace

TEST_CASE("fixing discrete variables collapses bounds") {
  Model m = tinyMixed();
  Model f = fixIntegers(m, {0.0, 1.0});
  CHECK(f.var(1).lower == 1.0);
  CHECK(f.var(1).upper == 1.0);
  CHECK(!f.hasDiscrete());
  CHECK_THROWS_AS(fixIntegers(m, {0.0, 2.0}), AssignmentError);
  CHECK_THROWS_AS(fixIntegers(m, {0.0, 0.5}), AssignmentError);
}

TEST_CASE("fixed subproblem optimum matches 1-D restriction") {
  Model m = tinyMixed();
  // y = 1: min (x-2)^2 + 0.5 with x <= 3  ->  0.5 at x = 2.
  NlpSolution s1 = solveLocal(fixIntegers(m, {1.0, 1.0}), {1.0, 1.0});
  REQUIRE(s1.status == NlpStatus::LocalOptimal);
  CHECK(s1.objective == doctest::Approx(0.5).epsilon(1e-5));
  // y = 0: min (x-2)^2 with x <= 1  ->  1.0 at x = 1.
  NlpSolution s0 = solveLocal(fixIntegers(m, {0.5, 0.0}), {0.5, 0.0});
  REQUIRE(s0.status == NlpStatus::LocalOptimal);
  CHECK(s0.objective == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("feasibility subproblem measures violation in the chosen norm") {
  // Constraint x + 1 <= 0 is violated by 1 on x in [0,1]: the minimal
  // L1 slack is 1 at x = 0.
  ModelBuilder mb;
  VarId x = mb.addVar("x", Domain::Continuous, 0.0, 1.0);
  auto& g = mb.graph();
  mb.setObjective(g.constant(0.0));
  // Use a nonlinear wrapper so the row gets a slack (linear rows stay
  // hard by design).
  mb.addConstraint(g.sum({{1.0, g.pow(g.var(x), 2)}, {1.0, g.var(x)}}, 1.0),
                   Sense::Leq, 0.0);
  Model m = mb.build();
  Model feas = makeFeasibility(m, {0.0}, Norm::L1);
  CHECK(feas.nvars() == 2);  // x plus one slack
  NlpSolution s = solveLocal(feas, {0.5, 2.0});
  REQUIRE(s.status == NlpStatus::LocalOptimal);
  CHECK(s.objective == doctest::Approx(1.0).epsilon(1e-5));

  // Two rows violated by 1 and 2: L1 totals 3, Linf takes the max 2.
  ModelBuilder mb2;
  VarId z = mb2.addVar("z", Domain::Continuous, 0.0, 0.0);
  auto& g2 = mb2.graph();
  mb2.setObjective(g2.constant(0.0));
  mb2.addConstraint(g2.sum({{1.0, g2.pow(g2.var(z), 2)}}, 1.0), Sense::Leq,
                    0.0);
  mb2.addConstraint(g2.sum({{1.0, g2.pow(g2.var(z), 2)}}, 2.0), Sense::Leq,
                    0.0);
  Model m2 = mb2.build();
  NlpSolution l1 = solveLocal(makeFeasibility(m2, {0.0}, Norm::L1),
                              Point(3, 1.0));
  NlpSolution li = solveLocal(makeFeasibility(m2, {0.0}, Norm::Linf),
                              Point(2, 1.0));
  REQUIRE(l1.status == NlpStatus::LocalOptimal);
  REQUIRE(li.status == NlpStatus::LocalOptimal);
  CHECK(l1.objective == doctest::Approx(3.0).epsilon(1e-5));
  CHECK(li.objective == doctest::Approx(2.0).epsilon(1e-5));

  // A feasible fixing has zero slack optimum.
  ModelBuilder mb3;
  VarId w = mb3.addVar("w", Domain::Continuous, 0.0, 1.0);
  auto& g3 = mb3.graph();
  mb3.setObjective(g3.constant(0.0));
  mb3.addConstraint(g3.sum({{1.0, g3.pow(g3.var(w), 2)}}, -1.0), Sense::Leq,
                    0.0);
  NlpSolution z0 = solveLocal(makeFeasibility(mb3.build(), {0.0}, Norm::L1),
                              {0.5, 1.0});
  REQUIRE(z0.status == NlpStatus::LocalOptimal);
  CHECK(z0.objective == doctest::Approx(0.0).epsilon(1e-5));
}

TEST_CASE("integrality relaxation widens domains only") {
  ModelBuilder mb;
  mb.addVar("y", Domain::Integer, 0.0, 3.0);
  auto& g = mb.graph();
  mb.setObjective(g.var(0));
  Model m = mb.build();
  Model r = relaxIntegrality(m);
  CHECK(r.var(0).domain == Domain::Continuous);
  CHECK(r.var(0).lower == 0.0);
  CHECK(r.var(0).upper == 3.0);
  // Purely continuous models come back unchanged.
  Model c = relaxIntegrality(relaxIntegrality(m));
  CHECK(!c.hasDiscrete());
}

TEST_CASE("epigraph form appends the objective variable last") {
  Model m = tinyMixed();
  VarId mu = -1;
  Model e = epigraphReformulation(m, &mu);
  CHECK(mu == m.nvars());
  CHECK(e.nvars() == m.nvars() + 1);
  CHECK(e.graph().node(e.objective()).op == Op::Var);
  CHECK((int)e.constraints().size() == (int)m.constraints().size() + 1);
  // On any point, the appended row value is f(x) - mu.
  Point p{1.5, 1.0, 0.0};
  double f = evaluate(m.graph(), m.objective(), {1.5, 1.0});
  double row = evaluate(e.graph(), e.constraints().back().body, p);
  CHECK(row == doctest::Approx(f).epsilon(1e-12));
}

TEST_CASE("binary expansion preserves the integer lattice") {
  ModelBuilder mb;
  VarId y = mb.addVar("y", Domain::Integer, -1.0, 5.0);
  auto& g = mb.graph();
  mb.setObjective(g.pow(g.var(y), 2));
  Model m = mb.build();
  Model b = binaryExpansion(m);
  CHECK(b.var(y).domain == Domain::Continuous);
  int nbin = 0;
  for (const auto& v : b.vars())
    if (v.domain == Domain::Binary) ++nbin;
  CHECK(nbin == 3);  // range 6 needs ceil(log2(7)) = 3 bits
  // Every binary pattern maps to y in [-1, 5] via the linking rows, and
  // all 7 values are reachable.
  std::vector<int> hit(7, 0);
  for (int mask = 0; mask < 8; ++mask) {
    int val = -1 + (mask & 1) + ((mask >> 1) & 1) * 2 + ((mask >> 2) & 1) * 4;
    if (val <= 5) hit[val + 1] = 1;
  }
  for (int h : hit) CHECK(h == 1);
}

TEST_CASE("json round trip preserves evaluation semantics") {
  Model m = tinyMixed();
  Model back = readModelJson(writeModelJson(m));
  CHECK(back.nvars() == m.nvars());
  CHECK(back.convexity() == m.convexity());
  CHECK((int)back.constraints().size() == (int)m.constraints().size());
  for (double xv : {0.0, 1.3, 4.0})
    for (double yv : {0.0, 1.0}) {
      Point p{xv, yv};
      CHECK(evaluate(back.graph(), back.objective(), p) ==
            doctest::Approx(evaluate(m.graph(), m.objective(), p)));
      CHECK(back.maxViolation(p) == doctest::Approx(m.maxViolation(p)));
    }
}

TEST_CASE("malformed input yields a parse diagnostic") {
  CHECK_THROWS_AS(readModelJson("{ not json"), ParseError);
  CHECK_THROWS_AS(readModelJson("{}"), ParseError);
  CHECK_THROWS_AS(
      readModelJson(R"({"variables":[{"name":"x","domain":"weird"}],)"
                    R"("objective":{"op":"var","name":"x"}})"),
      ParseError);
  try {
    readModelJson("{ not json");
  } catch (const ParseError& e) {
    // Diagnostics carry position information from the JSON parser.
    CHECK(std::string(e.what()).size() > 10);
  }
}
