#pragma once

#include "minlp/cuts.hpp"

namespace minlp {

struct LinearProgram {
  int nvars = 0;
  std::vector<double> obj;   // dense, size nvars
  double obj_const = 0.0;
  std::vector<LinRow> rows;  // sum(terms) <= rhs, or = rhs when eq
  Box bounds;                // size nvars

  static LinearProgram withVars(int n) {
    LinearProgram lp;
    lp.nvars = n;
    lp.obj.assign(n, 0.0);
    lp.bounds = Box(n);
    return lp;
  }
  void addCut(const LinearCut& c) {
    rows.push_back({c.terms, c.rhs, false});
  }
  void addCuts(const std::vector<LinearCut>& cs) {
    for (const auto& c : cs) addCut(c);
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Point primal;
  double objective = 0.0;
  std::vector<double> duals;  // per input row
  int iterations = 0;
};

// Bounded-variable two-phase primal simplex. Dantzig pricing with a
// Bland fallback after a degeneracy streak; deterministic for fixed
// input. Throws SolverFailure on iteration limit.
LpSolution solveLp(const LinearProgram& lp, double feastol = 1e-7);

}  // namespace minlp
