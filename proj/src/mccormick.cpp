#include "minlp/mccormick.hpp"

#include <algorithm>

namespace minlp {

namespace {

double ipow(double b, int k) {
  double r = 1.0;
  for (int e = 0; e < k; ++e) r *= b;
  return r;
}

// Tangency point c in (0, -L) of the line through (L, L^k) tangent to
// x^k, for odd k and L < 0 < U. Below c the convex envelope is that
// line, above it the function itself.
double oddTangency(double bound, int k) {
  double L = bound;
  auto h = [&](double c) {
    return (k - 1) * ipow(c, k) - k * L * ipow(c, k - 1) + ipow(L, k);
  };
  double lo = 0.0, hi = -L;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (h(mid) <= 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

UniEnv convexEnv(std::function<double(double)> f,
                 std::function<double(double)> df, double L, double U,
                 double xmin) {
  UniEnv e;
  e.cv = f;
  e.cvd = df;
  e.xmin = xmin;
  double fL = f(L), fU = f(U);
  double m = (fU - fL) / (U - L);
  e.cc = [fL, m, L](double x) { return fL + m * (x - L); };
  e.ccd = [m](double) { return m; };
  e.xmax = m >= 0.0 ? U : L;
  return e;
}

UniEnv concaveEnv(std::function<double(double)> f,
                  std::function<double(double)> df, double L, double U,
                  double xmax) {
  UniEnv e;
  e.cc = f;
  e.ccd = df;
  e.xmax = xmax;
  double fL = f(L), fU = f(U);
  double m = (fU - fL) / (U - L);
  e.cv = [fL, m, L](double x) { return fL + m * (x - L); };
  e.cvd = [m](double) { return m; };
  e.xmin = m >= 0.0 ? L : U;
  return e;
}

UniEnv constantEnv(double v) {
  UniEnv e;
  e.cv = e.cc = [v](double) { return v; };
  e.cvd = e.ccd = [](double) { return 0.0; };
  return e;
}

}  // namespace

UniEnv makeEnvelope(Op op, int k, Interval c) {
  double L = c.lo, U = c.hi;
  switch (op) {
    case Op::Sqrt:
      L = std::max(L, 0.0);
      if (U < 0.0) throw EmptyDomain("sqrt over negative interval");
      break;
    case Op::Log:
      if (L <= 0.0) throw EmptyDomain("log needs a strictly positive interval");
      break;
    case Op::Inv:
      if (L <= 0.0 && U >= 0.0)
        throw UnboundedBox("reciprocal over an interval containing zero");
      break;
    default:
      break;
  }
  if (!std::isfinite(L) || !std::isfinite(U))
    throw UnboundedBox("relaxation over an infinite interval");
  if (U - L < 1e-14) {
    switch (op) {
      case Op::Pow:
        return constantEnv(ipow(L, k));
      case Op::Exp:
        return constantEnv(std::exp(L));
      case Op::Log:
        return constantEnv(std::log(L));
      case Op::Sqrt:
        return constantEnv(std::sqrt(L));
      case Op::Inv:
        return constantEnv(1.0 / L);
      default:
        throw SolverFailure("makeEnvelope: unsupported op");
    }
  }
  switch (op) {
    case Op::Exp: {
      auto f = [](double x) { return std::exp(x); };
      return convexEnv(f, f, L, U, L);
    }
    case Op::Log:
      return concaveEnv([](double x) { return std::log(x); },
                        [](double x) { return 1.0 / x; }, L, U, U);
    case Op::Sqrt:
      return concaveEnv([](double x) { return std::sqrt(x); },
                        [](double x) { return x > 0 ? 0.5 / std::sqrt(x)
                                                    : 0.5 / std::sqrt(1e-12); },
                        L, U, U);
    case Op::Inv:
      if (L > 0.0)
        return convexEnv([](double x) { return 1.0 / x; },
                         [](double x) { return -1.0 / (x * x); }, L, U, U);
      return concaveEnv([](double x) { return 1.0 / x; },
                        [](double x) { return -1.0 / (x * x); }, L, U, L);
    case Op::Pow: {
      auto f = [k](double x) { return ipow(x, k); };
      auto df = [k](double x) { return k * ipow(x, k - 1); };
      if (k % 2 == 0) return convexEnv(f, df, L, U, std::clamp(0.0, L, U));
      if (L >= 0.0) return convexEnv(f, df, L, U, L);
      if (U <= 0.0) return concaveEnv(f, df, L, U, U);  // increasing: argmax U
      // Odd power over a mixed-sign interval: piecewise envelopes.
      UniEnv e;
      double cl = std::min(oddTangency(L, k), U);   // lower tangency
      double cu = std::max(-oddTangency(-U, k), L); // upper tangency (mirror)
      double ml = df(cl), mu = df(cu);
      double fL = f(L), fU = f(U);
      if (cl >= U) ml = (fU - fL) / (U - L);  // pure secant
      if (cu <= L) mu = (fU - fL) / (U - L);
      e.cv = [f, cl, fL, ml, L](double x) {
        return x >= cl ? f(x) : fL + ml * (x - L);
      };
      e.cvd = [df, cl, ml](double x) { return x >= cl ? df(x) : ml; };
      e.cc = [f, cu, fU, mu, U](double x) {
        return x <= cu ? f(x) : fU + mu * (x - U);
      };
      e.ccd = [df, cu, mu](double x) { return x <= cu ? df(x) : mu; };
      e.xmin = L;
      e.xmax = U;
      return e;
    }
    default:
      throw SolverFailure("makeEnvelope: unsupported op");
  }
}

namespace {

struct MC {
  Interval iv;
  double cv = 0.0, cc = 0.0;
  std::vector<double> cvs, ccs;
};

void clip(MC& m) {
  if (m.cv < m.iv.lo) {
    m.cv = m.iv.lo;
    std::fill(m.cvs.begin(), m.cvs.end(), 0.0);
  }
  if (m.cc > m.iv.hi) {
    m.cc = m.iv.hi;
    std::fill(m.ccs.begin(), m.ccs.end(), 0.0);
  }
}

// Relaxed value of coeff*u: picks the child's cv or cc by the sign of
// the coefficient. under=true builds an underestimate.
void addTerm(double w, const MC& u, bool under, double& val,
             std::vector<double>& sub) {
  bool usecv = under ? (w >= 0.0) : (w < 0.0);
  val += w * (usecv ? u.cv : u.cc);
  const auto& s = usecv ? u.cvs : u.ccs;
  for (size_t i = 0; i < sub.size(); ++i) sub[i] += w * s[i];
}

}  // namespace

McCormickValue mccormickEval(const ExprGraph& g, int root, const Box& box,
                             const Point& point, int nvars) {
  std::vector<int> order = g.reachable(root);
  std::vector<int> slot(root + 1, -1);
  for (size_t i = 0; i < order.size(); ++i) slot[order[i]] = (int)i;
  std::vector<MC> mc(order.size());

  for (size_t i = 0; i < order.size(); ++i) {
    const Node& n = g.node(order[i]);
    MC& m = mc[i];
    m.cvs.assign(nvars, 0.0);
    m.ccs.assign(nvars, 0.0);
    switch (n.op) {
      case Op::Const:
        m.iv = Interval::point(n.constant);
        m.cv = m.cc = n.constant;
        break;
      case Op::Var: {
        m.iv = box[n.var];
        double v = std::clamp(point[n.var], m.iv.lo, m.iv.hi);
        m.cv = m.cc = v;
        m.cvs[n.var] = m.ccs[n.var] = 1.0;
        break;
      }
      case Op::Sum: {
        m.iv = Interval::point(n.constant);
        m.cv = m.cc = n.constant;
        for (size_t k = 0; k < n.kids.size(); ++k) {
          const MC& u = mc[slot[n.kids[k]]];
          m.iv = m.iv + n.coeffs[k] * u.iv;
          addTerm(n.coeffs[k], u, true, m.cv, m.cvs);
          addTerm(n.coeffs[k], u, false, m.cc, m.ccs);
        }
        break;
      }
      case Op::Neg: {
        const MC& u = mc[slot[n.kids[0]]];
        m.iv = -u.iv;
        m.cv = -u.cc;
        m.cc = -u.cv;
        for (int j = 0; j < nvars; ++j) {
          m.cvs[j] = -u.ccs[j];
          m.ccs[j] = -u.cvs[j];
        }
        break;
      }
      case Op::Prod: {
        const MC& u = mc[slot[n.kids[0]]];
        const MC& v = mc[slot[n.kids[1]]];
        if (!u.iv.finite() || !v.iv.finite())
          throw UnboundedBox("bilinear term over an infinite interval");
        m.iv = u.iv * v.iv;
        double uL = u.iv.lo, uU = u.iv.hi, vL = v.iv.lo, vU = v.iv.hi;
        // Underestimating planes a*u + b*v + c with (a,b,c) from the
        // bilinear envelope; children substituted by sign of the
        // coefficient. Ties keep the first plane.
        auto plane = [&](double a, double b, double c, bool under,
                         double& val, std::vector<double>& sub) {
          val = c;
          sub.assign(nvars, 0.0);
          addTerm(a, v, under, val, sub);  // a multiplies v
          addTerm(b, u, under, val, sub);  // b multiplies u
        };
        double v1, v2;
        std::vector<double> s1, s2;
        plane(uL, vL, -uL * vL, true, v1, s1);
        plane(uU, vU, -uU * vU, true, v2, s2);
        if (v1 >= v2) {
          m.cv = v1;
          m.cvs = std::move(s1);
        } else {
          m.cv = v2;
          m.cvs = std::move(s2);
        }
        plane(uU, vL, -uU * vL, false, v1, s1);
        plane(uL, vU, -uL * vU, false, v2, s2);
        if (v1 <= v2) {
          m.cc = v1;
          m.ccs = std::move(s1);
        } else {
          m.cc = v2;
          m.ccs = std::move(s2);
        }
        break;
      }
      default: {  // univariate composition
        const MC& u = mc[slot[n.kids[0]]];
        UniEnv e = makeEnvelope(n.op, n.ipow, u.iv);
        switch (n.op) {
          case Op::Pow:
            m.iv = ivPow(u.iv, n.ipow);
            break;
          case Op::Exp:
            m.iv = ivExp(u.iv);
            break;
          case Op::Log:
            m.iv = ivLog(u.iv);
            break;
          case Op::Sqrt:
            m.iv = ivSqrt(u.iv);
            break;
          case Op::Inv:
            m.iv = ivRecip(u.iv);
            break;
          default:
            break;
        }
        auto compose = [&](double xref, const std::function<double(double)>& f,
                           const std::function<double(double)>& d, double& val,
                           std::vector<double>& sub) {
          double z;
          const std::vector<double>* s = nullptr;
          if (xref <= u.cv) {
            z = u.cv;
            s = &u.cvs;
          } else if (xref >= u.cc) {
            z = u.cc;
            s = &u.ccs;
          } else {
            z = xref;
          }
          val = f(z);
          double dz = d(z);
          sub.assign(nvars, 0.0);
          if (s)
            for (int j = 0; j < nvars; ++j) sub[j] = dz * (*s)[j];
        };
        compose(e.xmin, e.cv, e.cvd, m.cv, m.cvs);
        compose(e.xmax, e.cc, e.ccd, m.cc, m.ccs);
        break;
      }
    }
    clip(m);
  }

  const MC& r = mc[slot[root]];
  McCormickValue out;
  out.iv = r.iv;
  out.cv = r.cv;
  out.cc = r.cc;
  out.cv_sub = r.cvs;
  out.cc_sub = r.ccs;
  return out;
}

}  // namespace minlp
