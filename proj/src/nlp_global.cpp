#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

#include "minlp/nlp.hpp"
#include "minlp/presolve.hpp"

namespace minlp {

namespace {

struct SpatialNode {
  Box box;
  double lb = -kInf;
  long seq = 0;
};

struct NodeOrder {
  bool operator()(const SpatialNode& a, const SpatialNode& b) const {
    if (a.lb != b.lb) return a.lb > b.lb;  // min-heap on bound
    return a.seq > b.seq;
  }
};

// Score each base variable by the factor defining-node mismatch at the
// LP point, accumulated over every factor whose defining expression
// mentions it.
VarId pickBranchVar(const Model& m, const AvmResult& avm, const Point& lp_x,
                    const Box& box, double min_width) {
  int n = m.nvars();
  std::vector<double> score(n, 0.0);
  for (const auto& a : avm.aux) {
    double truth;
    try {
      truth = evaluate(m.graph(), a.node, lp_x);
    } catch (const DomainError&) {
      truth = kInf;
    }
    double viol = std::isfinite(truth) ? std::fabs(lp_x[a.id] - truth) : 1.0;
    if (viol < 1e-10) continue;
    std::vector<char> seen(n, 0);
    m.graph().collectVars(a.node, seen);
    for (int v = 0; v < n; ++v)
      if (seen[v]) score[v] += viol;
  }
  VarId best = -1;
  double best_score = 0.0;
  for (int v = 0; v < n; ++v) {
    if (box[v].width() < min_width) continue;
    if (score[v] > best_score) {
      best_score = score[v];
      best = v;
    }
  }
  if (best >= 0) return best;
  // Fallback: widest variable involved in any nonlinearity.
  double widest = min_width;
  for (VarId v : m.nonlinearVars()) {
    if (box[v].width() > widest) {
      widest = box[v].width();
      best = v;
    }
  }
  return best;
}

}  // namespace

NlpSolution solveGlobal(const Model& m, const NlpTolerances& tol) {
  for (const auto& v : m.vars())
    if (v.discrete() && v.lower != v.upper)
      throw AssignmentError("solveGlobal requires fixed discrete variables");
  Box root_box = m.bounds();
  for (int i = 0; i < m.nvars(); ++i)
    if (!root_box[i].finite())
      throw UnboundedBox("solveGlobal requires finite variable bounds");

  auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  NlpTolerances local_tol = tol;
  local_tol.multistart = 1;

  NlpSolution out;
  double ub = kInf;
  double dropped_lb = kInf;  // bounds of unbranchable discarded nodes
  std::priority_queue<SpatialNode, std::vector<SpatialNode>, NodeOrder> open;
  long seq = 0;
  open.push({root_box, -kInf, seq++});
  long nodes = 0;
  bool hit_limit = false;

  auto gapTol = [&] {
    return std::max(tol.eps_abs,
                    tol.eps_rel * (std::isfinite(ub) ? std::fabs(ub) : 0.0));
  };

  while (!open.empty()) {
    double lb_global = std::min(open.top().lb, dropped_lb);
    if (std::isfinite(ub) && ub - lb_global <= gapTol()) break;
    if (nodes >= tol.max_nodes || elapsed() > tol.time_limit_s) {
      hit_limit = true;
      break;
    }
    SpatialNode nd = open.top();
    open.pop();
    ++nodes;
    if (std::isfinite(ub) && nd.lb >= ub - gapTol()) continue;

    FbbtResult fr = fbbt(m, nd.box, 3);
    if (fr.infeasible) continue;
    AvmResult avm;
    std::vector<LinearCut> cuts;
    try {
      avm = avmDecompose(m, fr.box, /*allow_partial=*/false);
      cuts = convexificationCuts(avm);
    } catch (const DomainError&) {
      continue;  // region outside every expression domain
    }
    LinearProgram lp = buildRelaxationLp(m, fr.box, avm, cuts);
    LpSolution rel;
    try {
      rel = solveLp(lp);
    } catch (const SolverFailure&) {
      dropped_lb = std::min(dropped_lb, nd.lb);
      continue;
    }
    if (rel.status == LpStatus::Infeasible) continue;
    double node_lb =
        rel.status == LpStatus::Optimal ? rel.objective : nd.lb;
    node_lb = std::max(node_lb, nd.lb);
    if (std::isfinite(ub) && node_lb >= ub - gapTol()) continue;

    Point x(rel.primal.begin(), rel.primal.begin() + m.nvars());
    NlpSolution ls = solveLocal(m, x, local_tol);
    if (ls.status == NlpStatus::LocalOptimal && ls.objective < ub) {
      ub = ls.objective;
      out.point = ls.point;
      out.objective = ls.objective;
      out.kkt_residual = ls.kkt_residual;
    }
    if (std::isfinite(ub) && node_lb >= ub - gapTol()) continue;

    double min_width = 1e-8;
    VarId bv = pickBranchVar(m, avm, rel.primal, fr.box, min_width);
    if (bv < 0) {
      // Box too small to split further: accept the LP point if it is
      // essentially feasible, otherwise remember its bound.
      Point xp = x;
      for (int i = 0; i < m.nvars(); ++i)
        xp[i] = std::clamp(xp[i], fr.box[i].lo, fr.box[i].hi);
      double viol = m.maxViolation(xp);
      if (viol <= 1e-5) {
        double val;
        try {
          val = evaluate(m.graph(), m.objective(), xp);
        } catch (const DomainError&) {
          val = kInf;
        }
        if (val < ub) {
          ub = val;
          out.point = xp;
          out.objective = val;
          out.kkt_residual = kInf;
        }
      } else {
        dropped_lb = std::min(dropped_lb, node_lb);
      }
      continue;
    }
    const Interval& iv = fr.box[bv];
    double w = iv.width();
    double split = std::clamp(x[bv], iv.lo + 0.1 * w, iv.hi - 0.1 * w);
    SpatialNode left{fr.box, node_lb, seq++};
    left.box[bv].hi = split;
    SpatialNode right{fr.box, node_lb, seq++};
    right.box[bv].lo = split;
    open.push(std::move(left));
    open.push(std::move(right));
  }

  double lb_final = dropped_lb;
  if (!open.empty()) lb_final = std::min(lb_final, open.top().lb);
  if (open.empty() && !hit_limit && !std::isfinite(dropped_lb))
    lb_final = std::isfinite(ub) ? ub : kInf;
  if (!std::isfinite(ub)) {
    if (open.empty() && !hit_limit && !std::isfinite(dropped_lb)) {
      out.status = NlpStatus::Infeasible;
      out.objective = kInf;
      out.lower_bound = kInf;
    } else {
      out.status = NlpStatus::Failed;
      out.lower_bound = std::isfinite(lb_final) ? lb_final : -kInf;
    }
    return out;
  }
  out.lower_bound = std::min(lb_final, ub);
  bool certified = ub - out.lower_bound <= gapTol() + 1e-12;
  out.status = certified ? NlpStatus::GlobalOptimal : NlpStatus::LocalOptimal;
  return out;
}

}  // namespace minlp
