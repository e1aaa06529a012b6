#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "minlp/milp.hpp"

using namespace minlp;

namespace {

// Brute force over the integer lattice; continuous part handled by an
// LP at each assignment.
double bruteForce(const LinearProgram& lp, const std::vector<VarId>& ints) {
  std::vector<std::pair<long, long>> ranges;
  long combos = 1;
  for (VarId v : ints) {
    long lo = (long)std::ceil(lp.bounds[v].lo - 1e-9);
    long hi = (long)std::floor(lp.bounds[v].hi + 1e-9);
    ranges.emplace_back(lo, hi);
    combos *= (hi - lo + 1);
  }
  REQUIRE(combos <= (1L << 12));
  double best = kInf;
  std::vector<long> cur(ints.size());
  for (auto& r : ranges) (void)r;
  std::function<void(size_t)> rec = [&](size_t k) {
    if (k == ints.size()) {
      LinearProgram fixed = lp;
      for (size_t i = 0; i < ints.size(); ++i)
        fixed.bounds[ints[i]] = Interval::point((double)cur[i]);
      LpSolution s = solveLp(fixed);
      if (s.status == LpStatus::Optimal) best = std::min(best, s.objective);
      return;
    }
    for (long v = ranges[k].first; v <= ranges[k].second; ++v) {
      cur[k] = v;
      rec(k + 1);
    }
  };
  rec(0);
  return best;
}

}  // namespace

TEST_CASE("two-binary knapsack") {
  // max x + y s.t. 2x + y <= 2 over binaries -> 1 (as min -x - y -> -1).
  LinearProgram lp = LinearProgram::withVars(2);
  lp.obj = {-1.0, -1.0};
  lp.bounds[0] = {0.0, 1.0};
  lp.bounds[1] = {0.0, 1.0};
  lp.rows.push_back({{{0, 2.0}, {1, 1.0}}, 2.0, false});
  MilpResult r = solveMilp(lp, {0, 1});
  REQUIRE(r.status == MilpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(-1.0));
}

TEST_CASE("integral root solves without branching") {
  LinearProgram lp = LinearProgram::withVars(2);
  lp.obj = {1.0, 1.0};
  lp.bounds[0] = {0.0, 3.0};
  lp.bounds[1] = {0.0, 3.0};
  int fired = 0;
  MilpResult r = solveMilp(lp, {0, 1}, [&](const Point&, double) {
    ++fired;
    return CallbackResult{};
  });
  REQUIRE(r.status == MilpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(0.0));
  CHECK(r.nodes == 1);
  CHECK(fired == 1);
}

TEST_CASE("always-reject callback exhausts the lattice") {
  const int n = 6;
  LinearProgram lp = LinearProgram::withVars(n);
  std::vector<VarId> ints;
  ModelBuilder mb;
  for (int v = 0; v < n; ++v) {
    lp.obj[v] = (v % 2) ? 1.0 : -1.0;
    lp.bounds[v] = {0.0, 1.0};
    ints.push_back(v);
    mb.addVar("y" + std::to_string(v), Domain::Binary, 0.0, 1.0);
  }
  mb.setObjective(mb.graph().constant(0.0));
  Model m = mb.build();
  long firings = 0;
  MilpResult r = solveMilp(lp, ints, [&](const Point& p, double) {
    ++firings;
    CallbackResult cr;
    cr.action = CallbackAction::RejectAndCut;
    cr.cuts.push_back(noGoodCut(m, p));
    return cr;
  });
  CHECK(r.status == MilpStatus::Infeasible);
  CHECK(firings <= (1 << n));
  CHECK(firings >= 1);
}

TEST_CASE("callback cuts reshape the optimum") {
  // Reject the relaxation-optimal assignment once; the engine must
  // return the second best.
  LinearProgram lp = LinearProgram::withVars(2);
  lp.obj = {-2.0, -1.0};
  lp.bounds[0] = {0.0, 1.0};
  lp.bounds[1] = {0.0, 1.0};
  ModelBuilder mb;
  mb.addVar("a", Domain::Binary, 0.0, 1.0);
  mb.addVar("b", Domain::Binary, 0.0, 1.0);
  mb.setObjective(mb.graph().constant(0.0));
  Model m = mb.build();
  MilpResult r = solveMilp(lp, {0, 1}, [&](const Point& p, double) {
    if (p[0] > 0.5 && p[1] > 0.5) {
      CallbackResult cr;
      cr.action = CallbackAction::RejectAndCut;
      cr.cuts.push_back(noGoodCut(m, {1.0, 1.0}));
      return cr;
    }
    return CallbackResult{};
  });
  REQUIRE(r.status == MilpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(-2.0));  // (1,0) after (1,1) is cut
}

TEST_CASE("random instances match brute force") {
  std::mt19937 rng(61);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 120; ++trial) {
    int n = 2 + (int)(rng() % 3);       // total vars
    int ni = 1 + (int)(rng() % n);      // leading ni are integer
    LinearProgram lp = LinearProgram::withVars(n);
    std::vector<VarId> ints;
    for (int v = 0; v < n; ++v) {
      lp.obj[v] = u(rng);
      if (v < ni) {
        lp.bounds[v] = {0.0, (double)(1 + rng() % 3)};
        ints.push_back(v);
      } else {
        double a = u(rng), b = u(rng);
        lp.bounds[v] = {std::min(a, b), std::max(a, b)};
      }
    }
    for (int r = 0; r < 1 + (int)(rng() % 3); ++r) {
      LinRow row;
      for (int v = 0; v < n; ++v)
        if (rng() % 2) row.terms.emplace_back(v, u(rng));
      row.rhs = u(rng);
      lp.rows.push_back(row);
    }
    double oracle = bruteForce(lp, ints);
    MilpResult r = solveMilp(lp, ints);
    if (!std::isfinite(oracle)) {
      CHECK(r.status == MilpStatus::Infeasible);
    } else {
      REQUIRE(r.status == MilpStatus::Optimal);
      CHECK(r.objective == doctest::Approx(oracle).epsilon(1e-6));
      for (VarId v : ints) {
        double rv = r.primal[v];
        CHECK(std::fabs(rv - std::round(rv)) <= 1e-6);
      }
    }
  }
}
