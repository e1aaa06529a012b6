#include "minlp/oa.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <ostream>

namespace minlp {

const char* statusName(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::TimeLimit: return "time-limit";
    case SolveStatus::IterationLimit: return "iteration-limit";
  }
  return "?";
}

const char* algorithmName(Algorithm a) {
  switch (a) {
    case Algorithm::OA: return "oa";
    case Algorithm::LpNlpBB: return "lpnlp";
    case Algorithm::GOA: return "goa";
    case Algorithm::GLpNlpBB: return "glpnlp";
  }
  return "?";
}

namespace {

// Affine form of a linear expression (Const/Var/Sum nests only).
void linearAffine(const ExprGraph& g, int root,
                  std::map<int, double>& terms, double& cst, double w) {
  const Node& nd = g.node(root);
  switch (nd.op) {
    case Op::Const:
      cst += w * nd.constant;
      return;
    case Op::Var:
      terms[nd.var] += w;
      return;
    case Op::Sum:
      cst += w * nd.constant;
      for (size_t i = 0; i < nd.kids.size(); ++i)
        linearAffine(g, nd.kids[i], terms, cst, w * nd.coeffs[i]);
      return;
    default:
      throw AssignmentError("linearAffine on nonlinear expression");
  }
}

LinRow linearRow(const ExprGraph& g, int body) {
  std::map<int, double> terms;
  double cst = 0.0;
  linearAffine(g, body, terms, cst, 1.0);
  LinRow r;
  for (auto& [id, w] : terms)
    if (w != 0.0) r.terms.emplace_back(id, w);
  r.rhs = -cst;  // terms . v + cst <= 0
  r.eq = false;
  return r;
}

Model embedCutsInto(const Model& base, const AvmResult& avm,
                    const std::vector<LinearCut>& cuts) {
  return extendedWithRows(base, [&](ExprGraph& g) {
    std::vector<int> bodies;
    for (const auto& c : cuts) {
      std::vector<std::pair<double, int>> terms;
      bool ok = true;
      for (auto& [id, w] : c.terms) {
        if (id < base.nvars()) {
          terms.emplace_back(w, g.var(id));
        } else if (id >= avm.base_vars) {
          int nd = avm.aux[id - avm.base_vars].node;
          if (nd >= g.size()) {
            ok = false;
            break;
          }
          terms.emplace_back(w, nd);
        } else {
          ok = false;  // references a base id absent from this model
          break;
        }
      }
      if (ok) bodies.push_back(g.sum(terms, -c.rhs));
    }
    return bodies;
  });
}

}  // namespace

std::vector<LinearCut> oaCuts(const Model& em, const Point& point,
                              bool global_mode, const Box& box,
                              bool violated_only, CutGenStats* stats) {
  int n = em.nvars();
  VarId mu = n - 1;
  std::vector<LinearCut> out;
  std::vector<double> grad;
  Point clamped = point;
  if (global_mode)  // envelope estimators are only defined on the box
    for (int i = 0; i < n && i < (int)clamped.size(); ++i)
      clamped[i] = std::clamp(clamped[i], box[i].lo, box[i].hi);
  const Point& p = global_mode ? clamped : point;
  for (const auto& c : em.constraints()) {
    if (c.is_linear) continue;
    if (violated_only) {
      bool keep = true;
      try {
        keep = evaluate(em.graph(), c.body, p) >= -1e-7;
      } catch (const DomainError&) {
        keep = true;
      }
      if (!keep) continue;
    }
    if (global_mode) {
      try {
        LinearCut cut =
            affineUnderestimator(em.graph(), c.body, box, p, n);
        for (auto& [id, w] : cut.terms)
          if (id == mu) cut.kind = CutKind::OAObjective;
        out.push_back(std::move(cut));
      } catch (const DomainError&) {
        if (stats) ++stats->skipped;
      } catch (const UnboundedBox&) {
        if (stats) ++stats->skipped;
      } catch (const EmptyDomain&) {
        if (stats) ++stats->skipped;
      }
      continue;
    }
    double gval;
    try {
      gval = evaluate(em.graph(), c.body, p);
      grad = gradient(em.graph(), c.body, p, n);
    } catch (const DomainError&) {
      if (stats) ++stats->skipped;
      continue;
    }
    bool finite = std::isfinite(gval);
    for (double d : grad) finite = finite && std::isfinite(d);
    if (!finite) {
      if (stats) ++stats->skipped;
      continue;
    }
    LinearCut cut;
    double dot = 0.0;
    for (int i = 0; i < n; ++i) {
      if (grad[i] == 0.0) continue;
      cut.terms.emplace_back(i, grad[i]);
      dot += grad[i] * p[i];
      if (i == mu) cut.kind = CutKind::OAObjective;
    }
    if (cut.kind != CutKind::OAObjective) cut.kind = CutKind::OAConstraint;
    cut.rhs = dot - gval;
    cut.source = "taylor";
    out.push_back(std::move(cut));
  }
  return out;
}

Model fixedSubproblem(const Model& m, const PresolveResult& pre,
                      const Point& y, SubproblemScale scale) {
  Model sub = fixIntegers(withBounds(m, pre.tightened), y);
  if (scale == SubproblemScale::Complete)
    sub = embedCutsInto(sub, pre.avm, pre.cuts);
  return sub;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Engine {
  const Model& orig;
  SolverOptions opt;
  bool global;
  Model exp;   // binary-expanded for global variants, orig otherwise
  Model em;    // epigraph form of exp
  VarId mu = -1;
  int n_exp = 0, n_em = 0;
  std::vector<VarId> discrete;  // em ids (== exp ids)
  PresolveResult pre;
  Box box_em;
  Model exp_sub;  // subproblem template (bounds installed, maybe cuts)
  std::vector<LinearCut> pool;
  CutGenStats stats;

  // Appends only cuts not already in the pool (distinct integer
  // assignments can share an NLP solution and thus identical
  // linearizations). Returns the number actually added.
  int pushCuts(const std::vector<LinearCut>& cuts) {
    int added = 0;
    for (const auto& c : cuts) {
      bool dup = false;
      for (const auto& p : pool)
        if (cutsEquivalent(p, c)) {
          dup = true;
          break;
        }
      if (!dup) {
        pool.push_back(c);
        ++added;
      }
    }
    return added;
  }

  SolveResult res;
  Clock::time_point t0 = Clock::now();
  double lb = -kInf, ub = kInf;

  Engine(const Model& m, const SolverOptions& o) : orig(m), opt(o) {
    global = opt.algorithm == Algorithm::GOA ||
             opt.algorithm == Algorithm::GLpNlpBB;
    if (global) {
      Box b = m.bounds();
      for (int i = 0; i < m.nvars(); ++i)
        if (!b[i].finite())
          throw UnboundedBox("global algorithms require finite bounds");
    }
    exp = global ? binaryExpansion(m) : m;
    em = epigraphReformulation(exp, &mu);
    n_exp = exp.nvars();
    n_em = em.nvars();
    discrete = em.discreteVars();
  }

  double elapsed() const {
    return std::chrono::duration<double>(Clock::now() - t0).count();
  }
  double remaining() const { return opt.time_limit_s - elapsed(); }
  double gapTol() const {
    return std::max(opt.eps_abs,
                    opt.eps_rel * (std::isfinite(ub) ? std::fabs(ub) : 0.0));
  }
  bool gapClosed() const {
    return std::isfinite(ub) && ub - lb <= gapTol() + 1e-12;
  }

  NlpTolerances nlpTol() const {
    NlpTolerances t = opt.nlp;
    t.eps_abs = opt.eps_abs;
    t.eps_rel = opt.eps_rel;
    t.time_limit_s = std::max(1e-3, remaining());
    return t;
  }

  Box expBox() const {
    Box b(n_exp);
    for (int i = 0; i < n_exp; ++i) b[i] = box_em[i];
    return b;
  }

  Point midpoint(const Box& b) const {
    Point p(b.size());
    for (size_t i = 0; i < b.size(); ++i) {
      if (b[i].finite())
        p[i] = b[i].mid();
      else if (std::isfinite(b[i].lo))
        p[i] = b[i].lo;
      else if (std::isfinite(b[i].hi))
        p[i] = b[i].hi;
      else
        p[i] = 0.0;
    }
    return p;
  }

  void prepare() {
    if (opt.convexify || global) {
      PresolveOptions po;
      po.run_obbt = opt.convexify;
      pre = presolve(em, po);
      if (pre.status == PresolveStatus::ProvenInfeasible) return;
      box_em = pre.tightened;
    } else {
      box_em = em.bounds();
    }
    exp_sub = withBounds(exp, expBox());
    if (opt.convexify && opt.subproblem_scale == SubproblemScale::Complete)
      exp_sub = embedCutsInto(exp_sub, pre.avm, pre.cuts);
  }

  LinearProgram buildMaster() const {
    if (opt.convexify || global) {
      LinearProgram lp = buildRelaxationLp(em, box_em, pre.avm, pre.cuts);
      lp.addCuts(pool);
      return lp;
    }
    LinearProgram lp = LinearProgram::withVars(n_em);
    for (int i = 0; i < n_em; ++i) lp.bounds[i] = box_em[i];
    lp.obj[mu] = 1.0;
    for (const auto& c : em.constraints())
      if (c.is_linear) lp.rows.push_back(linearRow(em.graph(), c.body));
    lp.addCuts(pool);
    return lp;
  }

  Point liftToEm(const Point& xp, double val) const {
    Point p(n_em, 0.0);
    for (int i = 0; i < n_exp && i < (int)xp.size(); ++i) p[i] = xp[i];
    p[mu] = std::isfinite(val) ? val : 0.0;
    return p;
  }

  std::vector<long long> keyOf(const Point& master_point) const {
    std::vector<long long> k;
    k.reserve(discrete.size());
    for (VarId v : discrete)
      k.push_back(std::llround(master_point[v]));
    return k;
  }

  void updateIncumbent(const Point& xp, double val) {
    if (val >= ub - 1e-12) return;
    ub = val;
    res.has_incumbent = true;
    res.incumbent.assign(xp.begin(), xp.begin() + orig.nvars());
    for (VarId v : orig.discreteVars())
      res.incumbent[v] = std::round(res.incumbent[v]);
    res.objective = val;
  }

  void logIteration(const Point& y, const std::string& status, double val,
                    int cuts_added) {
    IterationLog e;
    e.iteration = (int)res.log.size();
    e.y = y;
    e.subproblem_status = status;
    e.subproblem_objective = val;
    e.lb = lb;
    e.ub = ub;
    e.cuts_added = cuts_added;
    e.elapsed_s = elapsed();
    if (opt.trace) {
      size_t h = 1469598103934665603ull;
      for (double v : y) {
        h ^= (size_t)std::llround(v);
        h *= 1099511628211ull;
      }
      *opt.trace << e.iteration << "," << lb << "," << ub << ","
                 << (std::isfinite(ub) && std::isfinite(lb) ? ub - lb : kInf)
                 << "," << (h & 0xffffffffull) << "," << status << ","
                 << pool.size() << "," << e.elapsed_s << "\n";
    }
    res.log.push_back(std::move(e));
  }

  // Solves the fixed-integer subproblem (plus the feasibility problem if
  // needed) and appends the resulting cuts to the pool. Returns the
  // value recorded for this assignment (+inf when proven infeasible).
  double solveFixedAndCut(const Point& yfull, const Point& warm,
                          std::string& status_out) {
    ++res.nlp_solves;
    Model sub = fixIntegers(exp_sub, yfull);
    NlpSolution s;
    bool did_global = false;
    try {
      if (global) {
        s = solveGlobal(sub, nlpTol());
        did_global = true;
      } else if (orig.convexity() == Convexity::DeclaredConvex) {
        s = solveLocal(sub, warm, nlpTol());
      } else {
        s = solveLocalMultistart(sub, warm, nlpTol());
      }
    } catch (const std::exception&) {
      s.status = NlpStatus::Failed;
    }
    int before = (int)pool.size();
    double recorded = kInf;
    if (s.status == NlpStatus::LocalOptimal ||
        s.status == NlpStatus::GlobalOptimal) {
      status_out = did_global && s.status == NlpStatus::GlobalOptimal
                       ? "global-optimal"
                       : "optimal";
      recorded = s.objective;
      updateIncumbent(s.point, s.objective);
      pushCuts(oaCuts(em, liftToEm(s.point, s.objective), global, box_em,
                      opt.violated_only, &stats));
    } else if (s.status == NlpStatus::Infeasible && did_global) {
      status_out = "infeasible";
      recorded = kInf;
    } else {
      // Local infeasibility or failure: consult the feasibility problem.
      Model feas = makeFeasibility(exp_sub, yfull, opt.feasibility_norm);
      Point fstart(feas.nvars(), 1.0);
      for (int i = 0; i < n_exp && i < (int)warm.size(); ++i)
        fstart[i] = warm[i];
      NlpSolution fs;
      try {
        fs = solveLocalMultistart(feas, fstart, nlpTol());
      } catch (const std::exception&) {
        fs.status = NlpStatus::Failed;
      }
      if (fs.status == NlpStatus::LocalOptimal && fs.objective > 1e-6) {
        status_out = "infeasible";
        recorded = kInf;
        Point fx(fs.point.begin(), fs.point.begin() + n_exp);
        auto cuts = oaCuts(em, liftToEm(fx, 0.0), global, box_em,
                           /*violated_only=*/false, &stats);
        // The objective cut carries no information at an infeasible
        // point's arbitrary mu for the global variant, but remains valid
        // in both modes, so keep all rows.
        pushCuts(cuts);
      } else if (fs.status == NlpStatus::LocalOptimal) {
        // A feasible point exists even though the fixed solve failed.
        status_out = "feasibility";
        res.heuristic_fallback = true;
        Point fx(fs.point.begin(), fs.point.begin() + n_exp);
        double val = kInf;
        try {
          val = evaluate(exp.graph(), exp.objective(), fx);
        } catch (const DomainError&) {
        }
        Model check = fixIntegers(exp_sub, yfull);
        if (std::isfinite(val) && check.maxViolation(fx) <= 1e-6)
          updateIncumbent(fx, val);
        recorded = val;
        pushCuts(oaCuts(em, liftToEm(fx, val), global, box_em,
                        opt.violated_only, &stats));
      } else {
        status_out = "failed";
        res.heuristic_fallback = true;
        recorded = kInf;
      }
    }
    bool can_nogood = true;
    for (VarId v : discrete)
      if (em.var(v).domain != Domain::Binary) can_nogood = false;
    if (can_nogood &&
        (global || status_out == "failed")) {
      Point yb(n_em, 0.0);
      for (int i = 0; i < n_exp && i < (int)yfull.size(); ++i)
        yb[i] = yfull[i];
      pool.push_back(noGoodCut(em, yb));
    }
    Point ylog;
    for (VarId v : discrete) ylog.push_back(yfull[v]);
    logIteration(ylog, status_out, recorded, (int)pool.size() - before);
    return recorded;
  }

  void finishWithBounds() {
    res.bounds.lb = global ? std::min(lb, ub) : lb;
    res.bounds.ub = ub;
    res.objective = ub;
    res.wall_time_s = elapsed();
  }

  SolveResult runContinuous() {
    // No discrete variables: one subproblem solve is the whole job.
    ++res.nlp_solves;
    if (global) {
      NlpSolution s = solveGlobal(exp_sub, nlpTol());
      if (s.status == NlpStatus::Infeasible) {
        res.status = SolveStatus::Infeasible;
      } else if (s.status == NlpStatus::GlobalOptimal) {
        ub = s.objective;
        lb = s.lower_bound;
        updateIncumbent(s.point, s.objective);
        res.status = SolveStatus::Optimal;
      } else if (s.status == NlpStatus::LocalOptimal) {
        ub = s.objective;
        lb = s.lower_bound;
        updateIncumbent(s.point, s.objective);
        res.status = elapsed() > opt.time_limit_s
                         ? SolveStatus::TimeLimit
                         : SolveStatus::IterationLimit;
      } else {
        res.status = SolveStatus::IterationLimit;
      }
    } else {
      NlpSolution s =
          solveLocalMultistart(exp_sub, midpoint(expBox()), nlpTol());
      if (s.status == NlpStatus::LocalOptimal) {
        ub = s.objective;
        if (orig.convexity() == Convexity::DeclaredConvex) lb = s.objective;
        updateIncumbent(s.point, s.objective);
        res.status = SolveStatus::Optimal;
      } else if (s.status == NlpStatus::Infeasible) {
        res.status = SolveStatus::Infeasible;
      } else {
        res.status = SolveStatus::IterationLimit;
        res.heuristic_fallback = true;
      }
    }
    finishWithBounds();
    return res;
  }

  void initialCuts() {
    // Deliberately linearizes at the plain-box relaxation optimum in
    // every configuration, so enabling convexification only ever adds
    // constraints to the first master.
    Model relaxed = relaxIntegrality(exp);
    try {
      NlpSolution s =
          solveLocal(relaxed, midpoint(exp.bounds()), nlpTol());
      if (s.status == NlpStatus::LocalOptimal) {
        pushCuts(oaCuts(em, liftToEm(s.point, s.objective), global,
                        box_em, opt.violated_only, &stats));
      }
    } catch (const std::exception&) {
      // Initialization is best-effort; the loop recovers without it.
    }
  }

  void recordRootBound() {
    try {
      LpSolution root = solveLp(buildMaster(), 1e-9);
      if (root.status == LpStatus::Optimal)
        res.first_master_lb = root.objective;
    } catch (const SolverFailure&) {
    }
  }

  SolveResult runMultiTree() {
    std::map<std::vector<long long>, double> visited;
    int repeats = 0;
    for (int iter = 0; iter < opt.max_iterations; ++iter) {
      if (remaining() <= 0) {
        res.status = SolveStatus::TimeLimit;
        break;
      }
      MilpOptions mo;
      mo.time_limit_s = remaining();
      mo.feastol = 1e-9;  // keep master bounds comparable across configs
      MilpResult mr = solveMilp(buildMaster(), discrete, nullptr, mo);
      res.master_nodes += mr.nodes;
      if (iter == 0 && mr.status == MilpStatus::Optimal)
        res.first_master_lb = mr.objective;
      if (mr.status == MilpStatus::Limit) {
        lb = std::max(lb, std::isfinite(ub) ? std::min(mr.bound, ub)
                                            : mr.bound);
        res.status = SolveStatus::TimeLimit;
        break;
      }
      if (mr.status == MilpStatus::Infeasible) {
        res.status = std::isfinite(ub) ? SolveStatus::Optimal
                                       : SolveStatus::Infeasible;
        if (std::isfinite(ub)) lb = ub;
        break;
      }
      double master_lb =
          global && std::isfinite(ub) ? std::min(mr.objective, ub)
                                      : mr.objective;
      lb = std::max(lb, master_lb);
      if (gapClosed()) {
        res.status = SolveStatus::Optimal;
        break;
      }
      auto key = keyOf(mr.primal);
      if (visited.count(key)) {
        if (++repeats > 5) {
          res.status = SolveStatus::IterationLimit;
          res.heuristic_fallback = true;
          break;
        }
        Point p(mr.primal.begin(), mr.primal.begin() + n_em);
        auto cuts = oaCuts(em, p, global, box_em, opt.violated_only, &stats);
        std::vector<LinearCut> violated;
        for (auto& c : cuts)
          if (!c.satisfied(p, 1e-9)) violated.push_back(c);
        if (pushCuts(violated) == 0) {
          res.status = SolveStatus::IterationLimit;
          res.heuristic_fallback = true;
          break;
        }
        continue;
      }
      repeats = 0;
      Point yfull(mr.primal.begin(), mr.primal.begin() + n_exp);
      for (VarId v : discrete) yfull[v] = std::round(yfull[v]);
      std::string st;
      double val = solveFixedAndCut(yfull, yfull, st);
      visited[key] = val;
      if (gapClosed()) {
        res.status = SolveStatus::Optimal;
        break;
      }
      if (iter == opt.max_iterations - 1)
        res.status = SolveStatus::IterationLimit;
    }
    finishWithBounds();
    return res;
  }

  SolveResult runSingleTree() {
    recordRootBound();
    std::map<std::vector<long long>, double> visited;
    auto cb = [&](const Point& pt, double obj) -> CallbackResult {
      auto key = keyOf(pt);
      auto it = visited.find(key);
      if (it != visited.end()) {
        double v = it->second;
        double tolv = 0.5 * std::max(opt.eps_abs,
                                     opt.eps_rel * (std::isfinite(v)
                                                        ? std::fabs(v)
                                                        : 0.0));
        if (obj >= v - tolv) return {CallbackAction::Accept, {}};
        Point p(pt.begin(), pt.begin() + n_em);
        auto cuts = oaCuts(em, p, global, box_em, opt.violated_only, &stats);
        std::vector<LinearCut> violated;
        for (auto& c : cuts)
          if (!c.satisfied(pt, 1e-9)) violated.push_back(c);
        if (violated.empty()) return {CallbackAction::Accept, {}};
        return {CallbackAction::RejectAndCut, std::move(violated)};
      }
      Point yfull(pt.begin(), pt.begin() + n_exp);
      for (VarId v : discrete) yfull[v] = std::round(yfull[v]);
      size_t before = pool.size();
      std::string st;
      double val = solveFixedAndCut(yfull, yfull, st);
      visited[key] = val;
      std::vector<LinearCut> added(pool.begin() + before, pool.end());
      if (added.empty()) return {CallbackAction::Accept, {}};
      return {CallbackAction::RejectAndCut, std::move(added)};
    };
    MilpOptions mo;
    mo.time_limit_s = remaining();
    mo.feastol = 1e-9;  // keep master bounds comparable across configs
    MilpResult mr = solveMilp(buildMaster(), discrete, cb, mo);
    res.master_nodes = mr.nodes;
    if (mr.status == MilpStatus::Limit) {
      lb = std::max(lb, std::isfinite(ub) ? std::min(mr.bound, ub)
                                          : mr.bound);
      res.status = SolveStatus::TimeLimit;
    } else if (mr.status == MilpStatus::Infeasible) {
      if (std::isfinite(ub)) {
        lb = ub;
        res.status = SolveStatus::Optimal;
      } else {
        res.status = SolveStatus::Infeasible;
      }
    } else {
      double master_lb = global && std::isfinite(ub)
                             ? std::min(mr.objective, ub)
                             : mr.objective;
      lb = std::max(lb, master_lb);
      if (gapClosed())
        res.status = SolveStatus::Optimal;
      else {
        res.status = SolveStatus::IterationLimit;
        res.heuristic_fallback = true;
      }
    }
    finishWithBounds();
    return res;
  }

  SolveResult run() {
    prepare();
    if ((opt.convexify || global) &&
        pre.status == PresolveStatus::ProvenInfeasible) {
      res.status = SolveStatus::Infeasible;
      res.wall_time_s = elapsed();
      return res;
    }
    if (discrete.empty()) return runContinuous();
    initialCuts();
    if (opt.algorithm == Algorithm::OA || opt.algorithm == Algorithm::GOA)
      return runMultiTree();
    return runSingleTree();
  }
};

}  // namespace

SolveResult solve(const Model& m, const SolverOptions& opt) {
  Engine e(m, opt);
  return e.run();
}

}  // namespace minlp
