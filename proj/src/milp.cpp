#include "minlp/milp.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <queue>

namespace minlp {

namespace {

struct BbNode {
  Box bounds;
  double lb;
  long seq;
  int depth;
};

struct NodeOrder {
  bool operator()(const BbNode& a, const BbNode& b) const {
    if (a.lb != b.lb) return a.lb > b.lb;  // min-heap on bound
    return a.seq > b.seq;                  // FIFO on ties
  }
};

}  // namespace

MilpResult solveMilp(const LinearProgram& lp, const std::vector<VarId>& integers,
                     MilpCallback callback, const MilpOptions& opt) {
  for (VarId v : integers)
    if (!lp.bounds[v].finite())
      throw UnboundedBox("integer variable with infinite bounds");

  MilpResult res;
  auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  std::priority_queue<BbNode, std::vector<BbNode>, NodeOrder> open;
  long seq = 0;
  open.push({lp.bounds, -kInf, seq++, 0});
  double best_bound_floor = -kInf;  // monotone reported bound

  auto solveNode = [&](const Box& bounds) {
    LinearProgram node = lp;
    node.bounds = bounds;
    node.addCuts(res.pool);
    return solveLp(node, opt.feastol);
  };

  while (!open.empty()) {
    if (res.nodes >= opt.max_nodes || elapsed() > opt.time_limit_s) {
      res.status = MilpStatus::Limit;
      res.bound = std::min(std::max(best_bound_floor, open.top().lb),
                           res.objective);
      return res;
    }
    BbNode nd = open.top();
    open.pop();
    best_bound_floor = std::max(best_bound_floor, nd.lb);
    if (nd.lb >= res.objective - 1e-9) break;  // best-bound proves optimality
    ++res.nodes;

    LpSolution s = solveNode(nd.bounds);
    bool pruned = false;
    while (true) {
      if (s.status == LpStatus::Unbounded)
        throw SolverFailure("unbounded node relaxation");
      if (s.status == LpStatus::Infeasible || s.objective >= res.objective - 1e-9) {
        pruned = true;
        break;
      }
      // Fractionality check.
      VarId frac_var = -1;
      double frac_best = opt.inttol;
      for (VarId v : integers) {
        double f = std::fabs(s.primal[v] - std::round(s.primal[v]));
        if (f > frac_best) {
          frac_best = f;
          frac_var = v;
        }
      }
      if (frac_var >= 0) {
        // Branch most-fractional.
        double x = s.primal[frac_var];
        BbNode down{nd.bounds, s.objective, seq++, nd.depth + 1};
        down.bounds[frac_var].hi = std::floor(x);
        BbNode up{nd.bounds, s.objective, seq++, nd.depth + 1};
        up.bounds[frac_var].lo = std::ceil(x);
        if (!down.bounds[frac_var].empty()) open.push(std::move(down));
        if (!up.bounds[frac_var].empty()) open.push(std::move(up));
        if (opt.node_log)
          *opt.node_log << res.nodes << "," << nd.depth << "," << s.objective
                        << "," << res.objective << ",branch\n";
        break;
      }
      // Integer feasible: snap and consult the callback.
      Point p = s.primal;
      for (VarId v : integers) p[v] = std::round(p[v]);
      CallbackResult cb;
      if (callback) {
        ++res.callback_calls;
        cb = callback(p, s.objective);
      }
      if (cb.action == CallbackAction::Accept) {
        if (s.objective < res.objective - 1e-12) {
          res.objective = s.objective;
          res.primal = p;
        }
        if (opt.node_log)
          *opt.node_log << res.nodes << "," << nd.depth << "," << s.objective
                        << "," << res.objective << ",accept\n";
        break;
      }
      if (cb.cuts.empty()) {
        // Rejected without guidance: nothing to re-solve against.
        if (opt.node_log)
          *opt.node_log << res.nodes << "," << nd.depth << "," << s.objective
                        << "," << res.objective << ",reject\n";
        break;
      }
      size_t fresh = 0;
      for (auto& c : cb.cuts) {
        bool dup = false;
        for (const auto& p : res.pool)
          if (cutsEquivalent(p, c)) {
            dup = true;
            break;
          }
        if (!dup) {
          res.pool.push_back(std::move(c));
          ++fresh;
        }
      }
      if (fresh == 0) {
        // Every cut is already in the pool: re-solving would loop.
        if (opt.node_log)
          *opt.node_log << res.nodes << "," << nd.depth << "," << s.objective
                        << "," << res.objective << ",reject\n";
        break;
      }
      s = solveNode(nd.bounds);  // lazy cuts installed, try again
    }
    (void)pruned;
  }

  if (std::isfinite(res.objective)) {
    res.status = MilpStatus::Optimal;
    res.bound = res.objective;
  } else {
    res.status = MilpStatus::Infeasible;
    res.bound = kInf;
  }
  return res;
}

}  // namespace minlp
