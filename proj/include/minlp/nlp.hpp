#pragma once

#include "minlp/model.hpp"

namespace minlp {

struct NlpTolerances {
  double feastol = 1e-7;
  double kkttol = 1e-6;
  double eps_abs = 1e-5;   // global solver absolute gap
  double eps_rel = 1e-3;   // global solver relative gap
  double time_limit_s = kInf;
  long max_nodes = 20000;  // spatial tree
  int multistart = 5;
  unsigned seed = 20240901;
};

enum class NlpStatus { LocalOptimal, GlobalOptimal, Infeasible, Failed };

struct NlpSolution {
  NlpStatus status = NlpStatus::Failed;
  Point point;
  double objective = kInf;
  double kkt_residual = kInf;
  double lower_bound = -kInf;  // certified bound from the global solver
};

// Augmented-Lagrangian outer loop with a spectral projected-gradient
// inner solve on the box. Requires all discrete variables fixed
// (collapsed bounds).
NlpSolution solveLocal(const Model& m, const Point& start,
                       const NlpTolerances& tol = {});

// Deterministic perturbed multistart around solveLocal; heuristic for
// nonconvex models.
NlpSolution solveLocalMultistart(const Model& m, const Point& start,
                                 const NlpTolerances& tol = {});

// Spatial branch and bound: LP lower bounds from envelope cuts, upper
// bounds from local solves at LP points, branching on the variable with
// the largest relaxation-gap contribution.
NlpSolution solveGlobal(const Model& m, const NlpTolerances& tol = {});

// KKT residual ||P(x - grad L) - x||_inf at (x, lambda); exposed so
// tests can recompute reported residuals independently.
double kktResidual(const Model& m, const Point& x,
                   const std::vector<double>& lambda);

}  // namespace minlp
