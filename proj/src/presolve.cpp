#include "minlp/presolve.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace minlp {

LinearProgram buildRelaxationLp(const Model& m, const Box& box,
                                const AvmResult& avm,
                                const std::vector<LinearCut>& cuts) {
  LinearProgram lp = LinearProgram::withVars(avm.totalVars());
  for (int i = 0; i < m.nvars(); ++i) lp.bounds[i] = box[i];
  for (size_t k = 0; k < avm.aux.size(); ++k)
    lp.bounds[m.nvars() + (int)k] = avm.aux[k].bounds;
  auto [oterms, oconst] = avm.affineOf(m.objective());
  for (auto& [id, w] : oterms) lp.obj[id] += w;
  lp.obj_const = oconst;
  for (const auto& c : m.constraints()) {
    auto [terms, cst] = avm.affineOf(c.body);
    lp.rows.push_back({terms, -cst, false});  // terms . v + cst <= 0
  }
  for (const auto& r : avm.linear_rows) lp.rows.push_back(r);
  lp.addCuts(cuts);
  return lp;
}

ObbtResult obbt(const Model& m, const AvmResult& avm,
                const std::vector<LinearCut>& cuts, const Box& box,
                const std::vector<VarId>& targets, bool parallel) {
  ObbtResult res;
  res.box = box;
  if (targets.empty()) return res;

  LinearProgram base = buildRelaxationLp(m, box, avm, cuts);
  base.obj.assign(base.nvars, 0.0);
  base.obj_const = 0.0;
  {
    LpSolution root = solveLp(base);
    ++res.lp_count;
    if (root.status == LpStatus::Infeasible) {
      res.infeasible = true;
      return res;
    }
  }

  int nt = static_cast<int>(targets.size());
  std::vector<Interval> tightened(nt);
  for (int k = 0; k < nt; ++k) tightened[k] = box[targets[k]];
  int lps = 0;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) reduction(+ : lps) if (parallel)
#endif
  for (int k = 0; k < nt; ++k) {
    VarId v = targets[k];
    LinearProgram lp = base;  // worker-owned copy
    for (int dir = 0; dir < 2; ++dir) {
      lp.obj.assign(lp.nvars, 0.0);
      lp.obj[v] = dir == 0 ? 1.0 : -1.0;
      try {
        LpSolution s = solveLp(lp);
        ++lps;
        if (s.status != LpStatus::Optimal) continue;  // never loosen
        if (dir == 0)
          tightened[k].lo = std::max(tightened[k].lo, s.objective - 1e-9);
        else
          tightened[k].hi = std::min(tightened[k].hi, -s.objective + 1e-9);
      } catch (const SolverFailure&) {
        // per-LP failure: skip this direction
      }
    }
  }
  res.lp_count += lps;

  for (int k = 0; k < nt; ++k) {
    VarId v = targets[k];
    Interval iv = res.box[v].intersect(tightened[k]);
    if (m.var(v).discrete()) iv = roundIntegerInterval(iv);
    if (iv.empty()) {
      res.infeasible = true;
      return res;
    }
    res.box[v] = iv;
  }
  return res;
}

namespace {

void tracePass(std::ostream* os, const char* stage, const Model& m,
               const Box& before, const Box& after) {
  if (!os) return;
  std::ostringstream line;
  line << "{\"stage\":\"" << stage << "\",\"bounds\":{";
  bool first = true;
  for (int i = 0; i < m.nvars(); ++i) {
    if (!first) line << ",";
    first = false;
    line << "\"" << m.var(i).name << "\":[[" << before[i].lo << ","
         << before[i].hi << "],[" << after[i].lo << "," << after[i].hi << "]]";
  }
  line << "}}";
  *os << line.str() << "\n";
}

}  // namespace

PresolveResult presolve(const Model& m, const PresolveOptions& opt) {
  auto t0 = std::chrono::steady_clock::now();
  PresolveResult res;
  Box original = m.bounds();

  FbbtResult f1 = fbbt(m, original, opt.fbbt_max_passes,
                       opt.fbbt_min_reduction);
  res.passes += f1.passes;
  if (f1.infeasible) {
    res.status = PresolveStatus::ProvenInfeasible;
    return res;
  }
  tracePass(opt.trace, "fbbt", m, original, f1.box);
  Box box = f1.box;

  res.avm = avmDecompose(m, box, opt.allow_partial);
  res.cuts = convexificationCuts(res.avm, opt.tangent_points);

  if (opt.run_obbt && !res.avm.affine.empty()) {
    std::vector<VarId> targets;
    for (VarId v : m.nonlinearVars())
      if (box[v].finite()) targets.push_back(v);
    ObbtResult ob =
        obbt(m, res.avm, res.cuts, box, targets, opt.parallel_obbt);
    res.lp_count += ob.lp_count;
    if (ob.infeasible) {
      res.status = PresolveStatus::ProvenInfeasible;
      return res;
    }
    tracePass(opt.trace, "obbt", m, box, ob.box);
    box = ob.box;

    FbbtResult f2 = fbbt(m, box, 1, opt.fbbt_min_reduction);
    res.passes += f2.passes;
    if (f2.infeasible) {
      res.status = PresolveStatus::ProvenInfeasible;
      return res;
    }
    tracePass(opt.trace, "fbbt-final", m, box, f2.box);
    box = f2.box;

    // Aux bounds and cuts are regenerated from the final box.
    res.avm = avmDecompose(m, box, opt.allow_partial);
    res.cuts = convexificationCuts(res.avm, opt.tangent_points);
  }

  res.tightened = box;
  res.status = PresolveStatus::Tightened;
  res.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return res;
}

}  // namespace minlp
