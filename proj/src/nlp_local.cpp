#include <algorithm>
#include <cmath>
#include <random>

#include "minlp/nlp.hpp"

namespace minlp {

namespace {

struct Workspace {
  const Model& m;
  std::vector<ExprEval> cons;
  ExprEval obj;
  Box box;
  int n;

  explicit Workspace(const Model& model)
      : m(model), obj(model.graph(), model.objective()) {
    for (const auto& c : model.constraints())
      cons.emplace_back(model.graph(), c.body);
    box = model.bounds();
    n = model.nvars();
  }

  void project(Point& x) const {
    for (int i = 0; i < n; ++i) x[i] = std::clamp(x[i], box[i].lo, box[i].hi);
  }

  double pgNorm(const Point& x, const std::vector<double>& g) const {
    double r = 0.0;
    for (int i = 0; i < n; ++i) {
      double step = std::clamp(x[i] - g[i], box[i].lo, box[i].hi) - x[i];
      r = std::max(r, std::fabs(step));
    }
    return r;
  }
};

// Generic merit function interface for the SPG loop: value plus
// gradient, +inf outside the domain of the expressions.
template <class F, class G>
int spg(Workspace& w, Point& x, F value, G grad, double tol, int max_iter) {
  w.project(x);
  std::vector<double> g(w.n), gnew(w.n), xnew(w.n);
  double f;
  try {
    f = value(x);
    grad(x, g);
  } catch (const DomainError&) {
    return -1;
  }
  std::vector<double> memory(10, f);
  size_t mem_pos = 0;
  double alpha = 1.0;
  {
    double gn = 0.0;
    for (double v : g) gn = std::max(gn, std::fabs(v));
    if (gn > 1.0) alpha = 1.0 / gn;
  }
  int it = 0;
  for (; it < max_iter; ++it) {
    if (w.pgNorm(x, g) <= tol) break;
    double gd = 0.0;
    for (int i = 0; i < w.n; ++i) {
      xnew[i] = std::clamp(x[i] - alpha * g[i], w.box[i].lo, w.box[i].hi);
      gd += g[i] * (xnew[i] - x[i]);
    }
    if (gd > -1e-16) {
      alpha = std::max(alpha * 0.1, 1e-12);
      if (alpha <= 1e-12) break;
      continue;
    }
    double fref = *std::max_element(memory.begin(), memory.end());
    double t = 1.0;
    double fnew;
    Point trial(w.n);
    while (true) {
      for (int i = 0; i < w.n; ++i) trial[i] = x[i] + t * (xnew[i] - x[i]);
      try {
        fnew = value(trial);
      } catch (const DomainError&) {
        fnew = kInf;
      }
      if (fnew <= fref + 1e-4 * t * gd || t < 1e-13) break;
      t *= 0.5;
    }
    if (t < 1e-13 && fnew > f) break;  // line search failure
    try {
      grad(trial, gnew);
    } catch (const DomainError&) {
      break;
    }
    // Barzilai-Borwein step update.
    double ss = 0.0, sy = 0.0;
    for (int i = 0; i < w.n; ++i) {
      double s = trial[i] - x[i];
      ss += s * s;
      sy += s * (gnew[i] - g[i]);
    }
    alpha = sy > 1e-16 ? std::clamp(ss / sy, 1e-10, 1e10) : 1e4;
    x = trial;
    f = fnew;
    g = gnew;
    memory[mem_pos] = f;
    mem_pos = (mem_pos + 1) % memory.size();
  }
  return it;
}

double maxViolation(Workspace& w, const Point& x) {
  double v = 0.0;
  for (auto& c : w.cons) v = std::max(v, c.value(x));
  return v;
}

}  // namespace

double kktResidual(const Model& m, const Point& x,
                   const std::vector<double>& lambda) {
  int n = m.nvars();
  std::vector<double> gL = gradient(m.graph(), m.objective(), x, n);
  std::vector<double> gc;
  for (size_t j = 0; j < m.constraints().size(); ++j) {
    if (lambda[j] == 0.0) continue;
    gc = gradient(m.graph(), m.constraints()[j].body, x, n);
    for (int i = 0; i < n; ++i) gL[i] += lambda[j] * gc[i];
  }
  Box box = m.bounds();
  double r = 0.0;
  for (int i = 0; i < n; ++i) {
    double step = std::clamp(x[i] - gL[i], box[i].lo, box[i].hi) - x[i];
    r = std::max(r, std::fabs(step));
  }
  return r;
}

NlpSolution solveLocal(const Model& m, const Point& start,
                       const NlpTolerances& tol) {
  for (const auto& v : m.vars())
    if (v.discrete() && v.lower != v.upper)
      throw AssignmentError("solveLocal requires fixed discrete variables");

  Workspace w(m);
  int n = w.n;
  size_t ncons = w.cons.size();
  Point x = start;
  x.resize(n, 0.0);
  for (int i = 0; i < n; ++i)
    if (!std::isfinite(x[i])) x[i] = w.box[i].mid();
  w.project(x);

  std::vector<double> lambda(ncons, 0.0);
  std::vector<double> gscratch(n);
  double rho = 10.0;
  double prev_viol = kInf;

  auto alValue = [&](const Point& p) {
    double v = w.obj.value(p);
    for (size_t j = 0; j < ncons; ++j) {
      double t = std::max(0.0, lambda[j] + rho * w.cons[j].value(p));
      v += (t * t - lambda[j] * lambda[j]) / (2.0 * rho);
    }
    return v;
  };
  auto alGrad = [&](const Point& p, std::vector<double>& g) {
    w.obj.gradient(p, g, n);
    for (size_t j = 0; j < ncons; ++j) {
      double t = std::max(0.0, lambda[j] + rho * w.cons[j].value(p));
      if (t == 0.0) continue;
      w.cons[j].gradient(p, gscratch, n);
      for (int i = 0; i < n; ++i) g[i] += t * gscratch[i];
    }
  };

  NlpSolution out;
  for (int outer = 0; outer < 40; ++outer) {
    double inner_tol =
        std::max(tol.kkttol * 0.5, 1e-2 * std::pow(0.25, outer));
    if (spg(w, x, alValue, alGrad, inner_tol, 1200) < 0) break;
    double viol = maxViolation(w, x);
    // First-order multiplier update.
    std::vector<double> lam_next(ncons);
    for (size_t j = 0; j < ncons; ++j)
      lam_next[j] = std::max(0.0, lambda[j] + rho * w.cons[j].value(x));
    if (viol <= tol.feastol) {
      double kkt = kktResidual(m, x, lam_next);
      if (kkt <= tol.kkttol || outer == 39) {
        out.status = NlpStatus::LocalOptimal;
        out.point = x;
        out.objective = w.obj.value(x);
        out.kkt_residual = kkt;
        return out;
      }
    }
    lambda = lam_next;
    if (viol > 0.25 * prev_viol && viol > tol.feastol)
      rho = std::min(rho * 10.0, 1e12);
    prev_viol = viol;
  }

  // Feasibility phase: squared violations only. Declares infeasibility
  // when it converges to a positive residual.
  auto fv = [&](const Point& p) {
    double v = 0.0;
    for (auto& c : w.cons) {
      double t = std::max(0.0, c.value(p));
      v += t * t;
    }
    return v;
  };
  auto fg = [&](const Point& p, std::vector<double>& g) {
    std::fill(g.begin(), g.end(), 0.0);
    for (auto& c : w.cons) {
      double t = std::max(0.0, c.value(p));
      if (t == 0.0) continue;
      c.gradient(p, gscratch, n);
      for (int i = 0; i < n; ++i) g[i] += 2.0 * t * gscratch[i];
    }
  };
  Point xf = x;
  spg(w, xf, fv, fg, 1e-10, 4000);
  double viol = maxViolation(w, xf);
  NlpSolution fail;
  fail.point = xf;
  fail.kkt_residual = kInf;
  if (viol > 10.0 * tol.feastol) {
    fail.status = NlpStatus::Infeasible;
    fail.objective = viol;
    return fail;
  }
  fail.status = NlpStatus::Failed;
  try {
    fail.objective = w.obj.value(xf);
  } catch (const DomainError&) {
    fail.objective = kInf;
  }
  return fail;
}

NlpSolution solveLocalMultistart(const Model& m, const Point& start,
                                 const NlpTolerances& tol) {
  NlpSolution best = solveLocal(m, start, tol);
  if (tol.multistart <= 1) return best;
  std::mt19937 rng(tol.seed);
  Box box = m.bounds();
  int n = m.nvars();
  for (int s = 1; s < tol.multistart; ++s) {
    Point p(n);
    for (int i = 0; i < n; ++i) {
      if (box[i].finite()) {
        std::uniform_real_distribution<double> d(box[i].lo, box[i].hi);
        p[i] = d(rng);
      } else {
        std::normal_distribution<double> d(0.0, 1.0 + std::fabs(start.empty() ? 0.0 : start[i]));
        p[i] = d(rng);
      }
    }
    NlpSolution cand = solveLocal(m, p, tol);
    bool better =
        cand.status == NlpStatus::LocalOptimal &&
        (best.status != NlpStatus::LocalOptimal ||
         cand.objective < best.objective - 1e-12);
    if (better) best = cand;
  }
  return best;
}

}  // namespace minlp
