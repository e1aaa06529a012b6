#include "minlp/cuts.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace minlp {

void LinearCut::normalize() {
  std::sort(terms.begin(), terms.end());
  std::vector<std::pair<int, double>> merged;
  for (auto& t : terms) {
    if (!merged.empty() && merged.back().first == t.first)
      merged.back().second += t.second;
    else
      merged.push_back(t);
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [](auto& t) { return t.second == 0.0; }),
               merged.end());
  terms = std::move(merged);
}

std::pair<std::vector<std::pair<int, double>>, double> AvmResult::affineOf(
    int node) const {
  auto it = affine.find(node);
  if (it == affine.end())
    throw UnboundedBox("node was skipped during decomposition");
  return {it->second.terms, it->second.rhs};
}

namespace {

struct Aff {
  std::vector<std::pair<int, double>> terms;
  double c = 0.0;
  bool opaque = false;

  bool isVar() const {
    return !opaque && terms.size() == 1 && terms[0].second == 1.0 && c == 0.0;
  }
};

void accumulate(Aff& dst, double w, const Aff& src) {
  dst.c += w * src.c;
  for (auto& [id, coef] : src.terms) dst.terms.emplace_back(id, w * coef);
}

void compact(Aff& a) {
  std::sort(a.terms.begin(), a.terms.end());
  std::vector<std::pair<int, double>> merged;
  for (auto& t : a.terms) {
    if (!merged.empty() && merged.back().first == t.first)
      merged.back().second += t.second;
    else
      merged.push_back(t);
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [](auto& t) { return t.second == 0.0; }),
               merged.end());
  a.terms = std::move(merged);
}

}  // namespace

AvmResult avmDecompose(const Model& m, const Box& box, bool allow_partial) {
  const ExprGraph& g = m.graph();
  AvmResult out;
  out.base_vars = m.nvars();

  std::vector<char> wanted(g.size(), 0);
  auto mark = [&](int root) {
    for (int id : g.reachable(root)) wanted[id] = 1;
  };
  mark(m.objective());
  for (const auto& c : m.constraints()) mark(c.body);

  std::unordered_map<int, Aff> rep;

  auto childVarId = [&](int child, Aff& a) -> VarId {
    if (a.isVar()) return a.terms[0].first;
    Interval iv = intervalEval(g, child, box);
    if (!iv.finite()) {
      if (allow_partial) return -1;
      throw UnboundedBox("affine subterm has an infinite interval");
    }
    AuxVar alias;
    alias.id = out.totalVars();
    alias.node = child;
    alias.bounds = iv;
    out.aux.push_back(alias);
    LinRow row;
    row.terms = a.terms;
    row.terms.emplace_back(alias.id, -1.0);
    row.rhs = -a.c;
    row.eq = true;
    out.linear_rows.push_back(std::move(row));
    Aff va;
    va.terms = {{alias.id, 1.0}};
    rep[child] = va;
    return alias.id;
  };

  for (int id = 0; id < g.size(); ++id) {
    if (!wanted[id]) continue;
    const Node& n = g.node(id);
    Aff a;
    switch (n.op) {
      case Op::Const:
        a.c = n.constant;
        break;
      case Op::Var:
        a.terms = {{n.var, 1.0}};
        break;
      case Op::Sum: {
        a.c = n.constant;
        for (size_t k = 0; k < n.kids.size(); ++k) {
          const Aff& ck = rep.at(n.kids[k]);
          if (ck.opaque) {
            a.opaque = true;
            break;
          }
          accumulate(a, n.coeffs[k], ck);
        }
        if (!a.opaque) compact(a);
        break;
      }
      case Op::Neg: {
        const Aff& ck = rep.at(n.kids[0]);
        if (ck.opaque)
          a.opaque = true;
        else
          accumulate(a, -1.0, ck);
        break;
      }
      default: {  // nonlinear factor
        bool skip = false;
        std::vector<VarId> childvars;
        std::vector<Interval> childbounds;
        for (int k : n.kids) {
          Aff& ck = rep.at(k);
          if (ck.opaque) {
            skip = true;
            break;
          }
          VarId cv = childVarId(k, ck);
          if (cv < 0) {
            skip = true;
            break;
          }
          Interval b = cv < out.base_vars ? box[cv] : out.auxBound(cv);
          if (!b.finite()) {
            if (!allow_partial)
              throw UnboundedBox("factor child has an infinite interval");
            skip = true;
            break;
          }
          childvars.push_back(cv);
          childbounds.push_back(b);
        }
        Interval zb = skip ? Interval::entire() : intervalEval(g, id, box);
        if (!skip && !zb.finite()) {
          if (!allow_partial)
            throw UnboundedBox("factor has an infinite interval");
          skip = true;
        }
        if (skip) {
          a.opaque = true;
          break;
        }
        AuxVar z;
        z.id = out.totalVars();
        z.node = id;
        z.bounds = zb;
        out.aux.push_back(z);
        Factor f;
        f.op = n.op;
        f.ipow = n.ipow;
        f.z = z.id;
        f.childvars = std::move(childvars);
        f.childbounds = std::move(childbounds);
        f.zbounds = zb;
        out.factors.push_back(std::move(f));
        a.terms = {{z.id, 1.0}};
        break;
      }
    }
    rep[id] = std::move(a);
  }

  for (auto& [node, aff] : rep) {
    if (aff.opaque) continue;
    LinRow r;
    r.terms = aff.terms;
    r.rhs = aff.c;  // value = terms . v + rhs
    out.affine[node] = std::move(r);
  }
  return out;
}

namespace {

bool sameCut(const LinearCut& a, const LinearCut& b) {
  if (a.terms.size() != b.terms.size()) return false;
  if (std::fabs(a.rhs - b.rhs) > 1e-10) return false;
  for (size_t i = 0; i < a.terms.size(); ++i)
    if (a.terms[i].first != b.terms[i].first ||
        std::fabs(a.terms[i].second - b.terms[i].second) > 1e-10)
      return false;
  return true;
}

void pushUnique(std::vector<LinearCut>& cuts, LinearCut c) {
  c.normalize();
  bool finite = std::isfinite(c.rhs);
  for (auto& [id, w] : c.terms) finite = finite && std::isfinite(w);
  if (!finite) return;
  for (const auto& e : cuts)
    if (sameCut(e, c)) return;
  cuts.push_back(std::move(c));
}

}  // namespace

std::vector<LinearCut> convexificationCuts(
    const AvmResult& avm, const std::vector<double>& extra_points) {
  std::vector<LinearCut> cuts;
  for (const auto& f : avm.factors) {
    if (f.op == Op::Prod) {
      VarId u = f.childvars[0], v = f.childvars[1];
      double uL = f.childbounds[0].lo, uU = f.childbounds[0].hi;
      double vL = f.childbounds[1].lo, vU = f.childbounds[1].hi;
      auto bilinear = [&](double cu, double cv2, double zc, double rhs) {
        LinearCut c;
        c.terms = {{u, cu}, {v, cv2}, {f.z, zc}};
        c.rhs = rhs;
        c.kind = CutKind::Envelope;
        c.source = "bilinear";
        pushUnique(cuts, std::move(c));
      };
      bilinear(vL, uL, -1.0, uL * vL);    // z >= vL u + uL v - uL vL
      bilinear(vU, uU, -1.0, uU * vU);    // z >= vU u + uU v - uU vU
      bilinear(-vL, -uU, 1.0, -uU * vL);  // z <= vL u + uU v - uU vL
      bilinear(-vU, -uL, 1.0, -uL * vU);  // z <= vU u + uL v - uL vU
      continue;
    }
    VarId u = f.childvars[0];
    const Interval& b = f.childbounds[0];
    UniEnv env;
    try {
      env = makeEnvelope(f.op, f.ipow, b);
    } catch (const std::runtime_error&) {
      continue;
    }
    std::vector<double> pts = {b.lo, b.mid(), b.hi};
    for (double p : extra_points)
      pts.push_back(std::clamp(p, b.lo, b.hi));
    for (double a : pts) {
      double dl = env.cvd(a), du = env.ccd(a);
      LinearCut lo;  // z >= cv(a) + cv'(a)(u - a)
      lo.terms = {{u, dl}, {f.z, -1.0}};
      lo.rhs = dl * a - env.cv(a);
      lo.kind = CutKind::Envelope;
      lo.source = "envelope-lo";
      pushUnique(cuts, std::move(lo));
      LinearCut hi;  // z <= cc(a) + cc'(a)(u - a)
      hi.terms = {{u, -du}, {f.z, 1.0}};
      hi.rhs = env.cc(a) - du * a;
      hi.kind = CutKind::Envelope;
      hi.source = "envelope-hi";
      pushUnique(cuts, std::move(hi));
    }
  }
  return cuts;
}

bool cutsEquivalent(const LinearCut& a, const LinearCut& b, double tol) {
  if (a.terms.size() != b.terms.size()) return false;
  double scale = std::abs(a.rhs) + std::abs(b.rhs);
  for (size_t i = 0; i < a.terms.size(); ++i) {
    if (a.terms[i].first != b.terms[i].first) return false;
    scale += std::abs(a.terms[i].second) + std::abs(b.terms[i].second);
  }
  double eps = tol * std::max(1.0, scale);
  if (std::abs(a.rhs - b.rhs) > eps) return false;
  for (size_t i = 0; i < a.terms.size(); ++i)
    if (std::abs(a.terms[i].second - b.terms[i].second) > eps) return false;
  return true;
}

LinearCut noGoodCut(const Model& m, const Point& y) {
  LinearCut c;
  c.kind = CutKind::NoGood;
  c.source = "no-good";
  int ones = 0;
  for (const auto& v : m.vars()) {
    if (!v.discrete()) continue;
    if (v.lower < -1e-9 || v.upper > 1.0 + 1e-9)
      throw NonBinaryError("no-good cut needs binary variables, got '" +
                           v.name + "'");
    double val = std::round(y[v.id]);
    if (val != 0.0 && val != 1.0)
      throw NonBinaryError("non-binary value in assignment");
    if (val == 1.0) {
      c.terms.emplace_back(v.id, 1.0);
      ++ones;
    } else {
      c.terms.emplace_back(v.id, -1.0);
    }
  }
  c.rhs = ones - 1;
  c.normalize();
  return c;
}

LinearCut affineUnderestimator(const ExprGraph& g, int root, const Box& box,
                               const Point& point, int nvars, int epi_var) {
  McCormickValue mc = mccormickEval(g, root, box, point, nvars);
  LinearCut c;
  double rhs = -mc.cv;
  for (int i = 0; i < nvars; ++i) {
    if (mc.cv_sub[i] != 0.0) c.terms.emplace_back(i, mc.cv_sub[i]);
    rhs += mc.cv_sub[i] * point[i];
  }
  if (epi_var >= 0) c.terms.emplace_back(epi_var, -1.0);
  c.rhs = rhs;
  c.kind = epi_var >= 0 ? CutKind::OAObjective : CutKind::OAConstraint;
  c.source = "mccormick-under";
  c.normalize();
  return c;
}

LinearCut affineOverestimator(const ExprGraph& g, int root, const Box& box,
                              const Point& point, int nvars, int epi_var) {
  McCormickValue mc = mccormickEval(g, root, box, point, nvars);
  LinearCut c;
  double rhs = mc.cc;
  for (int i = 0; i < nvars; ++i) {
    if (mc.cc_sub[i] != 0.0) c.terms.emplace_back(i, -mc.cc_sub[i]);
    rhs -= mc.cc_sub[i] * point[i];
  }
  if (epi_var >= 0) c.terms.emplace_back(epi_var, 1.0);
  c.rhs = rhs;
  c.kind = epi_var >= 0 ? CutKind::OAObjective : CutKind::OAConstraint;
  c.source = "mccormick-over";
  c.normalize();
  return c;
}

std::string cutsToJsonl(const std::vector<LinearCut>& cuts, const Model& m) {
  using nlohmann::json;
  static const char* kind_names[] = {"oa-objective", "oa-constraint",
                                     "envelope", "no-good"};
  std::ostringstream out;
  for (const auto& c : cuts) {
    json jx = json::object(), jy = json::object(), jz = json::object();
    for (auto& [id, w] : c.terms) {
      if (id >= m.nvars())
        jz["z" + std::to_string(id - m.nvars())] = w;
      else if (m.var(id).discrete())
        jy[m.var(id).name] = w;
      else
        jx[m.var(id).name] = w;
    }
    json j{{"x", jx},         {"y", jy},
           {"z", jz},         {"rhs", c.rhs},
           {"kind", kind_names[(int)c.kind]}, {"source", c.source}};
    out << j.dump() << "\n";
  }
  return out.str();
}

}  // namespace minlp
