#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <random>

#include "minlp/lp.hpp"

using namespace minlp;

namespace {

// Brute-force LP oracle for 2-3 variables: enumerate intersections of
// n active rows/bounds, keep feasible vertices, take the best. Assumes
// the feasible set is bounded by the box.
double vertexOracle(const LinearProgram& lp) {
  int n = lp.nvars;
  std::vector<std::vector<double>> planes;  // a0..a_{n-1}, rhs, meaning a.x = rhs
  for (const auto& r : lp.rows) {
    std::vector<double> a(n + 1, 0.0);
    for (auto& [id, w] : r.terms) a[id] = w;
    a[n] = r.rhs;
    planes.push_back(a);
  }
  for (int v = 0; v < n; ++v) {
    std::vector<double> a(n + 1, 0.0);
    a[v] = 1.0;
    a[n] = lp.bounds[v].lo;
    planes.push_back(a);
    a[n] = lp.bounds[v].hi;
    planes.push_back(a);
  }
  auto solveSquare = [n](std::vector<std::vector<double>> A,
                         std::vector<double>& x) {
    x.assign(n, 0.0);
    for (int c = 0; c < n; ++c) {
      int piv = -1;
      for (int r = c; r < n; ++r)
        if (piv < 0 || std::fabs(A[r][c]) > std::fabs(A[piv][c])) piv = r;
      if (piv < 0 || std::fabs(A[piv][c]) < 1e-11) return false;
      std::swap(A[c], A[piv]);
      for (int r = 0; r < n; ++r) {
        if (r == c) continue;
        double f = A[r][c] / A[c][c];
        for (int k = c; k <= n; ++k) A[r][k] -= f * A[c][k];
      }
    }
    for (int c = 0; c < n; ++c) x[c] = A[c][n] / A[c][c];
    return true;
  };
  double best = kInf;
  int m = (int)planes.size();
  std::vector<int> idx(n);
  std::function<void(int, int)> rec = [&](int start, int k) {
    if (k == n) {
      std::vector<std::vector<double>> A;
      for (int i : idx) A.push_back(planes[i]);
      std::vector<double> x;
      if (!solveSquare(A, x)) return;
      for (int v = 0; v < n; ++v)
        if (x[v] < lp.bounds[v].lo - 1e-8 || x[v] > lp.bounds[v].hi + 1e-8)
          return;
      for (const auto& r : lp.rows) {
        double act = 0.0;
        for (auto& [id, w] : r.terms) act += w * x[id];
        if (r.eq ? std::fabs(act - r.rhs) > 1e-8 : act > r.rhs + 1e-8) return;
      }
      double obj = lp.obj_const;
      for (int v = 0; v < n; ++v) obj += lp.obj[v] * x[v];
      best = std::min(best, obj);
      return;
    }
    for (int i = start; i < m; ++i) {
      idx[k] = i;
      rec(i + 1, k + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST_CASE("two-variable polygon optimum") {
  // min -x - y  s.t.  x + 2y <= 4, 3x + y <= 6, x,y >= 0
  // -> -2.8 at (1.6, 1.2).
  LinearProgram lp = LinearProgram::withVars(2);
  lp.obj = {-1.0, -1.0};
  lp.bounds[0] = {0.0, 100.0};
  lp.bounds[1] = {0.0, 100.0};
  lp.rows.push_back({{{0, 1.0}, {1, 2.0}}, 4.0, false});
  lp.rows.push_back({{{0, 3.0}, {1, 1.0}}, 6.0, false});
  LpSolution s = solveLp(lp);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(-2.8).epsilon(1e-9));
  CHECK(s.primal[0] == doctest::Approx(1.6).epsilon(1e-9));
  CHECK(s.primal[1] == doctest::Approx(1.2).epsilon(1e-9));
}

TEST_CASE("unconstrained box optimum sits at a bound") {
  LinearProgram lp = LinearProgram::withVars(1);
  lp.obj = {1.0};
  lp.bounds[0] = {0.0, 1.0};
  LpSolution s = solveLp(lp);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(0.0));
  CHECK(s.primal[0] == doctest::Approx(0.0));
}

TEST_CASE("contradictory rows are infeasible") {
  LinearProgram lp = LinearProgram::withVars(1);
  lp.bounds[0] = {-10.0, 10.0};
  lp.rows.push_back({{{0, -1.0}}, -2.0, false});  // x >= 2
  lp.rows.push_back({{{0, 1.0}}, 1.0, false});    // x <= 1
  CHECK(solveLp(lp).status == LpStatus::Infeasible);
}

TEST_CASE("unbounded below is detected") {
  LinearProgram lp = LinearProgram::withVars(1);
  lp.obj = {1.0};
  lp.bounds[0] = {-kInf, 5.0};
  CHECK(solveLp(lp).status == LpStatus::Unbounded);
}

TEST_CASE("equality rows are honored") {
  LinearProgram lp = LinearProgram::withVars(2);
  lp.obj = {1.0, 0.0};
  lp.bounds[0] = {0.0, 10.0};
  lp.bounds[1] = {0.0, 10.0};
  lp.rows.push_back({{{0, 1.0}, {1, 1.0}}, 4.0, true});
  LpSolution s = solveLp(lp);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(0.0));
  CHECK(s.primal[0] + s.primal[1] == doctest::Approx(4.0));
}

TEST_CASE("duals certify the optimum on the polygon example") {
  LinearProgram lp = LinearProgram::withVars(2);
  lp.obj = {-1.0, -1.0};
  lp.bounds[0] = {0.0, 100.0};
  lp.bounds[1] = {0.0, 100.0};
  lp.rows.push_back({{{0, 1.0}, {1, 2.0}}, 4.0, false});
  lp.rows.push_back({{{0, 3.0}, {1, 1.0}}, 6.0, false});
  LpSolution s = solveLp(lp);
  REQUIRE(s.status == LpStatus::Optimal);
  REQUIRE(s.duals.size() == 2);
  // Both rows are active; the dual objective matches the primal.
  double dual_obj = s.duals[0] * 4.0 + s.duals[1] * 6.0;
  CHECK(dual_obj == doctest::Approx(s.objective).epsilon(1e-7));
}

TEST_CASE("random LPs match vertex enumeration") {
  std::mt19937 rng(59);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_int_distribution<int> nv(2, 3), nr(1, 5);
  int compared = 0;
  for (int trial = 0; trial < 300; ++trial) {
    int n = nv(rng);
    LinearProgram lp = LinearProgram::withVars(n);
    for (int v = 0; v < n; ++v) {
      double a = u(rng), b = u(rng);
      lp.bounds[v] = {std::min(a, b), std::max(a, b)};
      lp.obj[v] = u(rng);
    }
    int rows = nr(rng);
    for (int r = 0; r < rows; ++r) {
      LinRow row;
      for (int v = 0; v < n; ++v)
        if (rng() % 2) row.terms.emplace_back(v, u(rng));
      row.rhs = u(rng);
      lp.rows.push_back(row);
    }
    double oracle = vertexOracle(lp);
    LpSolution s = solveLp(lp);
    if (!std::isfinite(oracle)) {
      CHECK(s.status == LpStatus::Infeasible);
      continue;
    }
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective ==
          doctest::Approx(oracle).epsilon(1e-7).scale(1.0));
    ++compared;
  }
  CHECK(compared > 80);
}
