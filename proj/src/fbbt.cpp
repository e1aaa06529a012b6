#include "minlp/fbbt.hpp"

#include <algorithm>

namespace minlp {

namespace {

constexpr double kEmptyTol = 1e-12;

Interval ivDivide(const Interval& a, const Interval& b) {
  if (b.contains(0.0)) return Interval::entire();  // hull of the split
  return a * ivRecip(b);
}

// Interval propagation state for one constraint body.
struct ConsProp {
  const ExprGraph& g;
  std::vector<int> order;
  std::vector<int> slot;
  std::vector<Interval> iv;

  ConsProp(const ExprGraph& graph, int root) : g(graph) {
    order = g.reachable(root);
    slot.assign(root + 1, -1);
    for (size_t i = 0; i < order.size(); ++i) slot[order[i]] = (int)i;
    iv.resize(order.size());
  }

  bool forward(const Box& box) {
    for (size_t i = 0; i < order.size(); ++i) {
      const Node& n = g.node(order[i]);
      Interval v;
      switch (n.op) {
        case Op::Const:
          v = Interval::point(n.constant);
          break;
        case Op::Var:
          v = box[n.var];
          break;
        case Op::Sum:
          v = Interval::point(n.constant);
          for (size_t k = 0; k < n.kids.size(); ++k)
            v = v + n.coeffs[k] * iv[slot[n.kids[k]]];
          break;
        case Op::Prod:
          v = iv[slot[n.kids[0]]] * iv[slot[n.kids[1]]];
          break;
        case Op::Pow:
          v = ivPow(iv[slot[n.kids[0]]], n.ipow);
          break;
        case Op::Exp:
          v = ivExp(iv[slot[n.kids[0]]]);
          break;
        case Op::Log:
          if (iv[slot[n.kids[0]]].hi <= 0.0) return false;
          v = ivLog(iv[slot[n.kids[0]]]);
          break;
        case Op::Sqrt:
          if (iv[slot[n.kids[0]]].hi < 0.0) return false;
          v = ivSqrt(iv[slot[n.kids[0]]]);
          break;
        case Op::Neg:
          v = -iv[slot[n.kids[0]]];
          break;
        case Op::Inv:
          if (iv[slot[n.kids[0]]].lo == 0.0 && iv[slot[n.kids[0]]].hi == 0.0)
            return false;
          v = ivRecip(iv[slot[n.kids[0]]]);
          break;
      }
      if (v.lo > v.hi + kEmptyTol) return false;
      iv[i] = v;
    }
    return true;
  }

  // Tightens child intervals from the (already tightened) node interval.
  // Returns false on a proven empty interval.
  bool backward(Box& box) {
    for (size_t ri = order.size(); ri-- > 0;) {
      const Node& n = g.node(order[ri]);
      const Interval& z = iv[ri];
      auto shrink = [&](int kid, Interval cand) -> bool {
        Interval& c = iv[slot[kid]];
        c = c.intersect(cand);
        if (c.lo > c.hi + kEmptyTol) return false;
        if (g.node(kid).op == Op::Var) {
          VarId v = g.node(kid).var;
          box[v] = box[v].intersect(c);
          if (box[v].lo > box[v].hi + kEmptyTol) return false;
        }
        return true;
      };
      switch (n.op) {
        case Op::Const:
        case Op::Var:
          break;
        case Op::Sum: {
          for (size_t k = 0; k < n.kids.size(); ++k) {
            Interval rest = Interval::point(n.constant);
            for (size_t j = 0; j < n.kids.size(); ++j)
              if (j != k) rest = rest + n.coeffs[j] * iv[slot[n.kids[j]]];
            Interval cand = (1.0 / n.coeffs[k]) * (z - rest);
            if (!shrink(n.kids[k], cand)) return false;
          }
          break;
        }
        case Op::Prod:
          if (!shrink(n.kids[0], ivDivide(z, iv[slot[n.kids[1]]])))
            return false;
          if (!shrink(n.kids[1], ivDivide(z, iv[slot[n.kids[0]]])))
            return false;
          break;
        case Op::Pow: {
          if (n.ipow % 2 == 0) {
            Interval r = ivRootEven(z, n.ipow);
            if (r.empty()) return false;
            const Interval& c = iv[slot[n.kids[0]]];
            Interval cand;
            if (c.lo >= 0.0)
              cand = r;
            else if (c.hi <= 0.0)
              cand = -r;
            else
              cand = {-r.hi, r.hi};
            if (!shrink(n.kids[0], cand)) return false;
          } else {
            Interval cand = {signedRoot(z.lo, n.ipow), signedRoot(z.hi, n.ipow)};
            if (!shrink(n.kids[0], detail::widen(cand))) return false;
          }
          break;
        }
        case Op::Exp: {
          if (z.hi <= 0.0) return false;  // exp is strictly positive
          Interval cand = {z.lo > 0.0 ? std::log(z.lo) : -kInf,
                           std::isfinite(z.hi) ? std::log(z.hi) : kInf};
          if (!shrink(n.kids[0], detail::widen(cand))) return false;
          break;
        }
        case Op::Log: {
          Interval cand = {
              std::isfinite(z.lo) ? std::exp(z.lo) : 0.0,
              std::isfinite(z.hi) ? std::exp(z.hi) : kInf};
          if (!shrink(n.kids[0], detail::widen(cand))) return false;
          break;
        }
        case Op::Sqrt: {
          Interval t = z.intersect({0.0, kInf});
          if (t.empty()) return false;
          Interval cand = {t.lo * t.lo, t.hi * t.hi};
          if (!shrink(n.kids[0], detail::widen(cand))) return false;
          break;
        }
        case Op::Neg:
          if (!shrink(n.kids[0], -z)) return false;
          break;
        case Op::Inv: {
          if (z.lo == 0.0 && z.hi == 0.0) return false;
          if (!shrink(n.kids[0], ivRecip(z))) return false;
          break;
        }
      }
    }
    return true;
  }
};

}  // namespace

FbbtResult fbbt(const Model& m, Box box, int max_passes, double min_reduction) {
  FbbtResult res;
  const ExprGraph& g = m.graph();

  auto roundIntegers = [&]() -> bool {
    for (const auto& v : m.vars()) {
      if (!v.discrete()) continue;
      box[v.id] = roundIntegerInterval(box[v.id]);
      if (box[v.id].empty()) return false;
    }
    return true;
  };

  if (!roundIntegers()) {
    res.infeasible = true;
    return res;
  }

  std::vector<ConsProp> props;
  props.reserve(m.constraints().size());
  for (const auto& c : m.constraints()) props.emplace_back(g, c.body);

  for (int pass = 0; pass < max_passes; ++pass) {
    Box before = box;
    res.passes = pass + 1;
    for (size_t ci = 0; ci < props.size(); ++ci) {
      ConsProp& p = props[ci];
      if (!p.forward(box)) {
        res.infeasible = true;
        return res;
      }
      int rslot = p.slot[m.constraints()[ci].body];
      p.iv[rslot] = p.iv[rslot].intersect({-kInf, 0.0});
      if (p.iv[rslot].empty()) {
        res.infeasible = true;
        return res;
      }
      if (!p.backward(box)) {
        res.infeasible = true;
        return res;
      }
    }
    if (!roundIntegers()) {
      res.infeasible = true;
      return res;
    }
    double reduction = 0.0;
    for (int v = 0; v < m.nvars(); ++v) {
      double wold = before[v].width(), wnew = box[v].width();
      if (std::isinf(wold) && std::isinf(wnew)) {
        if (before[v].lo != box[v].lo || before[v].hi != box[v].hi)
          reduction = 1.0;
        continue;
      }
      if (std::isinf(wold)) {
        reduction = 1.0;
        continue;
      }
      reduction = std::max(reduction, (wold - wnew) / std::max(1.0, wold));
    }
    if (reduction < min_reduction) break;
  }
  res.box = box;
  return res;
}

}  // namespace minlp
