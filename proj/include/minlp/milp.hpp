#pragma once

#include <functional>
#include <iosfwd>

#include "minlp/lp.hpp"

namespace minlp {

enum class CallbackAction { Accept, RejectAndCut };

// Invoked at integer-feasible node solutions. Returned cuts must not
// exclude any integer point feasible for the true problem; on
// RejectAndCut the node is re-solved with the cuts instead of becoming
// the incumbent.
struct CallbackResult {
  CallbackAction action = CallbackAction::Accept;
  std::vector<LinearCut> cuts;
};
using MilpCallback =
    std::function<CallbackResult(const Point& point, double objective)>;

struct MilpOptions {
  double inttol = 1e-6;
  double feastol = 1e-7;
  long max_nodes = 1000000;
  double time_limit_s = kInf;
  std::ostream* node_log = nullptr;  // CSV: node,depth,bound,incumbent,action
};

enum class MilpStatus { Optimal, Infeasible, Limit };

struct MilpResult {
  MilpStatus status = MilpStatus::Infeasible;
  Point primal;
  double objective = kInf;
  double bound = -kInf;  // best dual bound
  long nodes = 0;
  long callback_calls = 0;
  std::vector<LinearCut> pool;  // cuts injected during the solve
};

// Best-bound branch and bound over the LP plus integrality on the given
// variables. Branching is most-fractional, ties by lowest index; node
// selection best-bound, ties FIFO.
MilpResult solveMilp(const LinearProgram& lp,
                     const std::vector<VarId>& integers,
                     MilpCallback callback = nullptr,
                     const MilpOptions& opt = {});

}  // namespace minlp
