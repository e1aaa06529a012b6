#pragma once

#include <iosfwd>

#include "minlp/milp.hpp"
#include "minlp/nlp.hpp"
#include "minlp/presolve.hpp"

namespace minlp {

enum class Algorithm { OA, LpNlpBB, GOA, GLpNlpBB };
enum class SubproblemScale { Reduced, Complete };

struct SolverOptions {
  Algorithm algorithm = Algorithm::OA;
  // Runs bound tightening plus envelope-cut generation up front; the
  // tightened box feeds the subproblems and the cuts join the master.
  bool convexify = false;
  // Reduced: fixed-integer subproblems get tightened bounds only.
  // Complete: the envelope cuts are additionally embedded as redundant
  // constraints (auxiliaries substituted out). Only meaningful together
  // with convexify.
  SubproblemScale subproblem_scale = SubproblemScale::Reduced;
  double eps_abs = 1e-5;
  double eps_rel = 1e-3;
  double time_limit_s = 900.0;
  Norm feasibility_norm = Norm::L1;
  int max_iterations = 500;
  // Only linearize constraints violated (or active) at the expansion
  // point instead of every nonlinear row.
  bool violated_only = false;
  NlpTolerances nlp;
  std::ostream* trace = nullptr;  // per-iteration CSV
};

enum class SolveStatus { Optimal, Infeasible, TimeLimit, IterationLimit };

struct BoundPair {
  double lb = -kInf;
  double ub = kInf;
  double gap() const { return ub - lb; }
};

// One record per fixed-integer subproblem solve.
struct IterationLog {
  int iteration = 0;
  std::vector<double> y;
  std::string subproblem_status;
  double subproblem_objective = kInf;
  double lb = -kInf;
  double ub = kInf;
  int cuts_added = 0;
  double elapsed_s = 0.0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::IterationLimit;
  bool has_incumbent = false;
  Point incumbent;  // original variable space
  double objective = kInf;
  BoundPair bounds;
  std::vector<IterationLog> log;
  int nlp_solves = 0;
  long master_nodes = 0;
  double first_master_lb = -kInf;
  // Set when a subproblem failure forced a heuristic workaround; the
  // result then carries no optimality claim beyond the reported bounds.
  bool heuristic_fallback = false;
  double wall_time_s = 0.0;
};

// Gradient-based linearizations (global_mode: affine envelope
// underestimators instead of tangents) of every nonlinear row of the
// epigraph-form model at the given point. Non-differentiable or
// off-domain rows are skipped and counted.
struct CutGenStats {
  int skipped = 0;
};
std::vector<LinearCut> oaCuts(const Model& epi_model, const Point& point,
                              bool global_mode, const Box& box,
                              bool violated_only = false,
                              CutGenStats* stats = nullptr);

// Fixed-integer subproblem over the tightened box; Complete scale embeds
// the presolve cuts as extra rows with auxiliaries substituted by their
// defining expressions. pre must come from presolve(m, ...).
Model fixedSubproblem(const Model& m, const PresolveResult& pre,
                      const Point& y, SubproblemScale scale);

SolveResult solve(const Model& m, const SolverOptions& opt = {});

const char* statusName(SolveStatus s);
const char* algorithmName(Algorithm a);

}  // namespace minlp
