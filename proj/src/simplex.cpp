#include <algorithm>
#include <cstdio>
#include <cmath>

#include "minlp/lp.hpp"

namespace minlp {

namespace {

constexpr int kMaxIter = 50000;
constexpr int kRefactorEvery = 64;
constexpr int kBlandAfter = 100;
constexpr double kPivTol = 1e-9;   // ratio test / update pivots
constexpr double kSingTol = 1e-13;  // refactorization singularity

struct Simplex {
  int n;        // structural
  int m;        // rows
  int N;        // structural + slack + artificial
  double feastol;
  std::vector<std::vector<double>> A;  // m x N, row-major
  std::vector<double> b;
  std::vector<double> lb, ub;
  std::vector<double> cost;            // current phase costs
  std::vector<int> basis;              // per row
  std::vector<char> basic;             // per column
  std::vector<double> nbval;           // nonbasic value per column
  std::vector<double> xB;              // per row
  std::vector<std::vector<double>> Binv;
  int iters = 0;
  int degen_streak = 0;
  bool safe_mode = false;  // Bland + refactor every pivot (retry path)

  explicit Simplex(const LinearProgram& lp, double tol) : feastol(tol) {
    n = lp.nvars;
    m = static_cast<int>(lp.rows.size());
    N = n + 2 * m;
    A.assign(m, std::vector<double>(N, 0.0));
    b.resize(m);
    lb.assign(N, 0.0);
    ub.assign(N, 0.0);
    for (int j = 0; j < n; ++j) {
      lb[j] = lp.bounds[j].lo;
      ub[j] = lp.bounds[j].hi;
    }
    for (int i = 0; i < m; ++i) {
      for (auto& [id, w] : lp.rows[i].terms) A[i][id] += w;
      b[i] = lp.rows[i].rhs;
      int s = n + i;
      A[i][s] = 1.0;
      lb[s] = 0.0;
      ub[s] = lp.rows[i].eq ? 0.0 : kInf;
    }
    // Nonbasic start: nearest finite bound, free variables at zero.
    basic.assign(N, 0);
    nbval.assign(N, 0.0);
    for (int j = 0; j < n + m; ++j) {
      if (std::isfinite(lb[j]))
        nbval[j] = lb[j];
      else if (std::isfinite(ub[j]))
        nbval[j] = ub[j];
      else
        nbval[j] = 0.0;
    }
    // Artificial basis absorbing the initial residual.
    basis.resize(m);
    xB.resize(m);
    for (int i = 0; i < m; ++i) {
      double r = b[i];
      for (int j = 0; j < n + m; ++j)
        if (A[i][j] != 0.0) r -= A[i][j] * nbval[j];
      int a = n + m + i;
      A[i][a] = 1.0;
      if (r >= 0.0) {
        lb[a] = 0.0;
        ub[a] = kInf;
      } else {
        lb[a] = -kInf;
        ub[a] = 0.0;
      }
      basis[i] = a;
      basic[a] = 1;
      xB[i] = r;
    }
    Binv.assign(m, std::vector<double>(m, 0.0));
    for (int i = 0; i < m; ++i) Binv[i][i] = 1.0;
  }

  void refactor() {
    // Rebuild Binv by Gauss-Jordan on the basis matrix.
    std::vector<std::vector<double>> M(m, std::vector<double>(2 * m, 0.0));
    for (int i = 0; i < m; ++i) {
      for (int r = 0; r < m; ++r) M[r][i] = A[r][basis[i]];
      M[i][m + i] = 1.0;
    }
    for (int c = 0; c < m; ++c) {
      int piv = c;
      for (int r = c + 1; r < m; ++r)
        if (std::fabs(M[r][c]) > std::fabs(M[piv][c])) piv = r;
      if (std::fabs(M[piv][c]) < kSingTol)
        throw SolverFailure("singular basis in refactorization");
      std::swap(M[c], M[piv]);
      double d = M[c][c];
      for (int k = c; k < 2 * m; ++k) M[c][k] /= d;
      for (int r = 0; r < m; ++r) {
        if (r == c) continue;
        double f = M[r][c];
        if (f == 0.0) continue;
        for (int k = c; k < 2 * m; ++k) M[r][k] -= f * M[c][k];
      }
    }
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < m; ++k) Binv[i][k] = M[i][m + k];
    recomputeXB();
  }

  void recomputeXB() {
    std::vector<double> r = b;
    for (int j = 0; j < N; ++j) {
      if (basic[j] || nbval[j] == 0.0) continue;
      for (int i = 0; i < m; ++i)
        if (A[i][j] != 0.0) r[i] -= A[i][j] * nbval[j];
    }
    for (int i = 0; i < m; ++i) {
      xB[i] = 0.0;
      for (int k = 0; k < m; ++k) xB[i] += Binv[i][k] * r[k];
    }
  }

  std::vector<double> dualVec() const {
    std::vector<double> y(m, 0.0);
    for (int k = 0; k < m; ++k) {
      double cB = cost[basis[k]];
      if (cB == 0.0) continue;
      for (int i = 0; i < m; ++i) y[i] += cB * Binv[k][i];
    }
    return y;
  }

  double colDot(const std::vector<double>& y, int j) const {
    double d = 0.0;
    for (int i = 0; i < m; ++i)
      if (A[i][j] != 0.0) d += y[i] * A[i][j];
    return d;
  }

  // Runs the simplex with the current cost vector. Returns false on
  // unboundedness.
  bool optimize(bool phase2) {
    int since_refactor = 0;
    while (true) {
      if (++iters > kMaxIter)
        throw SolverFailure("simplex iteration limit reached");
      std::vector<double> y = dualVec();
      bool bland = safe_mode || degen_streak > kBlandAfter;
      int enter = -1, dir = 0;
      double best = feastol;
      for (int j = 0; j < N; ++j) {
        if (basic[j]) continue;
        if (lb[j] == ub[j]) continue;          // fixed, cannot move
        if (phase2 && j >= n + m) continue;    // artificials stay put
        double d = cost[j] - colDot(y, j);
        int dj = 0;
        if (d < -feastol && nbval[j] < ub[j]) dj = 1;
        else if (d > feastol && nbval[j] > lb[j]) dj = -1;
        if (dj == 0) continue;
        if (bland) {
          enter = j;
          dir = dj;
          break;
        }
        if (std::fabs(d) > best) {
          best = std::fabs(d);
          enter = j;
          dir = dj;
        }
      }
      if (enter < 0) {
        refactor();  // clean state before the phase result is consumed
        return true;
      }

      std::vector<double> w(m, 0.0);
      for (int i = 0; i < m; ++i) {
        double acc = 0.0;
        for (int k = 0; k < m; ++k)
          if (A[k][enter] != 0.0) acc += Binv[i][k] * A[k][enter];
        w[i] = acc;
      }
      double trange = ub[enter] - lb[enter];  // may be inf
      double t = trange;
      int leave = -1;  // -1: bound flip
      for (int i = 0; i < m; ++i) {
        double delta = -dir * w[i];
        double ti;
        if (delta < -kPivTol) {
          double l = lb[basis[i]];
          ti = std::isfinite(l) ? (xB[i] - l) / (-delta) : kInf;
        } else if (delta > kPivTol) {
          double u = ub[basis[i]];
          ti = std::isfinite(u) ? (u - xB[i]) / delta : kInf;
        } else {
          continue;
        }
        if (ti < 0.0) ti = 0.0;
        // Ties go to the most stable pivot (largest |w|); under Bland,
        // to the smallest basis index for anti-cycling.
        bool better =
            ti < t - 1e-12 ||
            (ti < t + 1e-12 && leave >= 0 &&
             (bland ? basis[i] < basis[leave]
                    : std::fabs(w[i]) > std::fabs(w[leave])));
        if (better) {
          t = ti;
          leave = i;
        }
      }
      if (!std::isfinite(t)) return false;  // unbounded ray

      degen_streak = t < 1e-11 ? degen_streak + 1 : 0;
      for (int i = 0; i < m; ++i) xB[i] += -dir * w[i] * t;
      if (leave < 0) {
        nbval[enter] = dir > 0 ? ub[enter] : lb[enter];  // bound flip
        continue;
      }
      int lv = basis[leave];
      double delta_l = -dir * w[leave];
      basic[lv] = 0;
      nbval[lv] = delta_l < 0.0 ? lb[lv] : ub[lv];
      basis[leave] = enter;
      basic[enter] = 1;
      xB[leave] = nbval[enter] + dir * t;
      double piv = w[leave];
      if (std::fabs(piv) < kPivTol)
        throw SolverFailure("tiny pivot in simplex update");
      for (int k = 0; k < m; ++k) Binv[leave][k] /= piv;
      for (int i = 0; i < m; ++i) {
        if (i == leave || w[i] == 0.0) continue;
        double f = w[i];
        for (int k = 0; k < m; ++k) Binv[i][k] -= f * Binv[leave][k];
      }
      if (++since_refactor >= (safe_mode ? 1 : kRefactorEvery)) {
        refactor();
        since_refactor = 0;
      }
    }
  }

  // Basic values within bounds and rows satisfied, up to tolerance.
  bool consistent(double tol) const {
    for (int i = 0; i < m; ++i) {
      int j = basis[i];
      if (xB[i] < lb[j] - tol || xB[i] > ub[j] + tol) return false;
    }
    std::vector<double> val(N, 0.0);
    for (int j = 0; j < N; ++j)
      if (!basic[j]) val[j] = nbval[j];
    for (int i = 0; i < m; ++i) val[basis[i]] = xB[i];
    for (int i = 0; i < m; ++i) {
      double r = -b[i];
      for (int j = 0; j < N; ++j)
        if (A[i][j] != 0.0) r += A[i][j] * val[j];
      double scale = std::max(1.0, std::fabs(b[i]));
      if (std::fabs(r) > tol * scale) return false;
    }
    return true;
  }
};

}  // namespace

LpSolution solveLp(const LinearProgram& lp, double feastol) {
  LpSolution sol;
  if (lp.rows.empty()) {
    // Bound optimum, no simplex needed.
    sol.primal.assign(lp.nvars, 0.0);
    sol.objective = lp.obj_const;
    for (int j = 0; j < lp.nvars; ++j) {
      const Interval& bd = lp.bounds[j];
      if (bd.lo > bd.hi) {
        sol.status = LpStatus::Infeasible;
        return sol;
      }
      double v;
      if (lp.obj[j] > 0.0)
        v = bd.lo;
      else if (lp.obj[j] < 0.0)
        v = bd.hi;
      else
        v = std::isfinite(bd.lo) ? bd.lo : (std::isfinite(bd.hi) ? bd.hi : 0.0);
      if (!std::isfinite(v) && lp.obj[j] != 0.0) {
        sol.status = LpStatus::Unbounded;
        return sol;
      }
      if (!std::isfinite(v)) v = 0.0;
      sol.primal[j] = v;
      sol.objective += lp.obj[j] * v;
    }
    sol.status = LpStatus::Optimal;
    return sol;
  }

  for (int j = 0; j < lp.nvars; ++j)
    if (lp.bounds[j].lo > lp.bounds[j].hi) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }

  auto attempt = [&](bool safe, LpSolution& out) -> bool {
    Simplex sx(lp, feastol);
    sx.safe_mode = safe;

    // Phase 1: drive the artificials to zero.
    sx.cost.assign(sx.N, 0.0);
    for (int i = 0; i < sx.m; ++i)
      sx.cost[sx.n + sx.m + i] = sx.lb[sx.n + sx.m + i] == 0.0 ? 1.0 : -1.0;
    sx.degen_streak = 0;
    if (!sx.optimize(false))
      throw SolverFailure("phase-1 simplex reported unbounded");
    double infeas = 0.0;
    for (int i = 0; i < sx.m; ++i) {
      int a = sx.n + sx.m + i;
      double v = sx.basic[a] ? 0.0 : sx.nbval[a];
      for (int r = 0; r < sx.m; ++r)
        if (sx.basis[r] == a) v = sx.xB[r];
      infeas += std::fabs(v);
    }
    double scale = 1.0;
    for (int i = 0; i < sx.m; ++i)
      scale = std::max(scale, std::fabs(sx.b[i]));
    if (infeas > feastol * scale * 10.0) {
      out.status = LpStatus::Infeasible;
      out.iterations = sx.iters;
      return true;
    }
    // Pin artificials at zero for phase 2.
    for (int i = 0; i < sx.m; ++i) {
      int a = sx.n + sx.m + i;
      sx.lb[a] = sx.ub[a] = 0.0;
      if (!sx.basic[a]) sx.nbval[a] = 0.0;
    }
    sx.recomputeXB();

    sx.cost.assign(sx.N, 0.0);
    for (int j = 0; j < sx.n; ++j) sx.cost[j] = lp.obj[j];
    sx.degen_streak = 0;
    if (!sx.optimize(true)) {
      out.status = LpStatus::Unbounded;
      out.iterations = sx.iters;
      return true;
    }
    if (!sx.consistent(1e-6)) return false;  // numerical drift; retry

    out.status = LpStatus::Optimal;
    out.primal.assign(lp.nvars, 0.0);
    for (int j = 0; j < lp.nvars; ++j) out.primal[j] = sx.nbval[j];
    for (int i = 0; i < sx.m; ++i)
      if (sx.basis[i] < lp.nvars) out.primal[sx.basis[i]] = sx.xB[i];
    out.objective = lp.obj_const;
    for (int j = 0; j < lp.nvars; ++j)
      out.objective += lp.obj[j] * out.primal[j];
    out.duals = sx.dualVec();
    out.iterations = sx.iters;
    return true;
  };

  bool ok;
  try {
    ok = attempt(false, sol);
  } catch (const SolverFailure&) {
    ok = false;
  }
  if (!ok) {
    try {
      ok = attempt(true, sol);
    } catch (const SolverFailure& e) {
#ifdef LP_DEBUG
      std::fprintf(stderr, "LPFAIL n=%d m=%d: %s\n", lp.nvars,
                   (int)lp.rows.size(), e.what());
      for (int j = 0; j < lp.nvars; ++j)
        std::fprintf(stderr, "  bound %d [%g,%g] obj %g\n", j,
                     lp.bounds[j].lo, lp.bounds[j].hi, lp.obj[j]);
      for (auto& r : lp.rows) {
        std::fprintf(stderr, "  row%s rhs=%g:", r.eq ? "=" : "<", r.rhs);
        for (auto& [id, w] : r.terms) std::fprintf(stderr, " %d:%g", id, w);
        std::fprintf(stderr, "\n");
      }
#endif
      throw;
    }
    if (!ok)
      throw SolverFailure("simplex basis inconsistent after safe retry");
  }
  return sol;
}

}  // namespace minlp
