#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "minlp/mccormick.hpp"

using namespace minlp;

namespace {

int randomDag(ExprGraph& g, int nvars, std::mt19937& rng, int depth = 3) {
  std::uniform_int_distribution<int> pick(0, 6);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  if (depth == 0) {
    if (pick(rng) % 2)
      return g.var(std::uniform_int_distribution<int>(0, nvars - 1)(rng));
    return g.constant(coef(rng));
  }
  int a = randomDag(g, nvars, rng, depth - 1);
  int b = randomDag(g, nvars, rng, depth - 1);
  switch (pick(rng)) {
    case 0: return g.sum({{coef(rng), a}, {coef(rng), b}}, coef(rng));
    case 1: return g.mul(a, b);
    case 2: return g.pow(a, 2);
    case 3: return g.pow(a, 3);
    case 4: return g.exp(g.sum({{0.3, a}}));
    case 5: return g.sqrt(g.sum({{0.1, g.pow(a, 2)}}, 0.5));
    default: return g.neg(a);
  }
}

}  // namespace

TEST_CASE("bilinear relaxation at the unit-box center") {
  ExprGraph g;
  int e = g.mul(g.var(0), g.var(1));
  Box box{{0.0, 1.0}, {0.0, 1.0}};
  McCormickValue v = mccormickEval(g, e, box, {0.5, 0.5}, 2);
  CHECK(v.cv == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(v.cc == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("convex univariate: relaxation below is the function, above the secant") {
  ExprGraph g;
  int e = g.pow(g.var(0), 2);
  Box box{{0.0, 2.0}};
  McCormickValue v = mccormickEval(g, e, box, {1.0}, 1);
  CHECK(v.cv == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(v.cc == doctest::Approx(2.0).epsilon(1e-12));  // secant 2x at x=1
}

TEST_CASE("sandwich holds on random DAGs") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 40 && checked < 1000; ++trial) {
    ExprGraph g;
    int root = randomDag(g, 3, rng);
    Box box{{-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}};
    for (int s = 0; s < 50; ++s) {
      Point p{u(rng), u(rng), u(rng)};
      try {
        McCormickValue v = mccormickEval(g, root, box, p, 3);
        double val = evaluate(g, root, p);
        CHECK(v.cv <= val + 1e-7 * (1.0 + std::fabs(val)));
        CHECK(v.cc >= val - 1e-7 * (1.0 + std::fabs(val)));
        ++checked;
      } catch (const DomainError&) {
      } catch (const EmptyDomain&) {
        break;
      } catch (const UnboundedBox&) {
        break;
      }
    }
  }
  CHECK(checked >= 1000);
}

TEST_CASE("subgradient planes stay on the correct side") {
  std::mt19937 rng(37);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    ExprGraph g;
    int root = randomDag(g, 2, rng);
    Box box{{-1.0, 1.0}, {-1.0, 1.0}};
    Point p{u(rng), u(rng)};
    McCormickValue v;
    try {
      v = mccormickEval(g, root, box, p, 2);
    } catch (const std::exception&) {
      continue;
    }
    for (int s = 0; s < 200; ++s) {
      Point q{u(rng), u(rng)};
      double val;
      try {
        val = evaluate(g, root, q);
      } catch (const DomainError&) {
        continue;
      }
      double below = v.cv, above = v.cc;
      for (int i = 0; i < 2; ++i) {
        below += v.cv_sub[i] * (q[i] - p[i]);
        above += v.cc_sub[i] * (q[i] - p[i]);
      }
      double tol = 1e-7 * (1.0 + std::fabs(val));
      CHECK(below <= val + tol);
      CHECK(above >= val - tol);
    }
  }
}

TEST_CASE("univariate envelopes bound their operation") {
  std::mt19937 rng(41);
  struct Case {
    Op op;
    int k;
    Interval iv;
  };
  std::vector<Case> cases = {
      {Op::Pow, 2, {-2.0, 3.0}},  {Op::Pow, 3, {-1.5, 2.0}},
      {Op::Exp, 0, {-1.0, 2.0}},  {Op::Log, 0, {0.5, 4.0}},
      {Op::Sqrt, 0, {0.25, 9.0}}, {Op::Inv, 0, {0.5, 3.0}},
      {Op::Pow, 4, {-1.0, 2.0}},
  };
  for (const auto& c : cases) {
    UniEnv env = makeEnvelope(c.op, c.k, c.iv);
    std::uniform_real_distribution<double> u(c.iv.lo, c.iv.hi);
    for (int s = 0; s < 300; ++s) {
      double x = u(rng);
      double fx = c.op == Op::Pow ? std::pow(x, c.k) : applyUnary(c.op, x);
      CHECK(env.cv(x) <= fx + 1e-9 * (1.0 + std::fabs(fx)));
      CHECK(env.cc(x) >= fx - 1e-9 * (1.0 + std::fabs(fx)));
      // Tangents of the envelope are global under/over-estimators.
      double t = u(rng);
      double tan_cv = env.cv(t) + env.cvd(t) * (x - t);
      double tan_cc = env.cc(t) + env.ccd(t) * (x - t);
      CHECK(tan_cv <= fx + 1e-8 * (1.0 + std::fabs(fx)));
      CHECK(tan_cc >= fx - 1e-8 * (1.0 + std::fabs(fx)));
    }
  }
  CHECK_THROWS_AS(makeEnvelope(Op::Log, 0, {-2.0, -1.0}), EmptyDomain);
  CHECK_THROWS_AS(makeEnvelope(Op::Exp, 0, Interval::entire()), UnboundedBox);
}
