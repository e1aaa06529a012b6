#include "minlp/expr.hpp"

#include <algorithm>
#include <cstring>

namespace minlp {

bool Node::operator==(const Node& o) const {
  return op == o.op && constant == o.constant && var == o.var &&
         ipow == o.ipow && kids == o.kids && coeffs == o.coeffs;
}

uint64_t ExprGraph::nodeHash(const Node& n) const {
  uint64_t h = 1469598103934665603ull;
  auto mix = [&h](uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  mix(static_cast<uint64_t>(n.op));
  uint64_t bits;
  std::memcpy(&bits, &n.constant, sizeof bits);
  mix(bits);
  mix(static_cast<uint64_t>(n.var) + 0x9e3779b9);
  mix(static_cast<uint64_t>(n.ipow) + 0x85ebca6b);
  for (int k : n.kids) mix(static_cast<uint64_t>(k) + 1);
  for (double c : n.coeffs) {
    std::memcpy(&bits, &c, sizeof bits);
    mix(bits);
  }
  return h;
}

int ExprGraph::add(Node n) {
  uint64_t h = nodeHash(n);
  auto it = index_.find(h);
  if (it != index_.end())
    for (int id : it->second)
      if (nodes_[id] == n) return id;
  int id = static_cast<int>(nodes_.size());
  nodes_.push_back(std::move(n));
  index_[h].push_back(id);
  return id;
}

int ExprGraph::constant(double v) {
  Node n;
  n.op = Op::Const;
  n.constant = v;
  return add(std::move(n));
}

int ExprGraph::var(VarId v) {
  Node n;
  n.op = Op::Var;
  n.var = v;
  return add(std::move(n));
}

int ExprGraph::sum(std::vector<std::pair<double, int>> terms, double offset) {
  // Flatten nested sums and fold constants/negations.
  std::vector<std::pair<double, int>> flat;
  double c = offset;
  for (auto& [w, id] : terms) {
    if (w == 0.0) continue;
    const Node& n = nodes_[id];
    if (n.op == Op::Const) {
      c += w * n.constant;
    } else if (n.op == Op::Sum) {
      c += w * n.constant;
      for (size_t k = 0; k < n.kids.size(); ++k)
        flat.emplace_back(w * n.coeffs[k], n.kids[k]);
    } else if (n.op == Op::Neg) {
      flat.emplace_back(-w, n.kids[0]);
    } else {
      flat.emplace_back(w, id);
    }
  }
  // Merge duplicate children.
  std::sort(flat.begin(), flat.end(),
            [](auto& a, auto& b) { return a.second < b.second; });
  std::vector<std::pair<double, int>> merged;
  for (auto& t : flat) {
    if (!merged.empty() && merged.back().second == t.second)
      merged.back().first += t.first;
    else
      merged.push_back(t);
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [](auto& t) { return t.first == 0.0; }),
               merged.end());
  if (merged.empty()) return constant(c);
  if (merged.size() == 1 && merged[0].first == 1.0 && c == 0.0)
    return merged[0].second;
  Node n;
  n.op = Op::Sum;
  n.constant = c;
  for (auto& [w, id] : merged) {
    n.coeffs.push_back(w);
    n.kids.push_back(id);
  }
  return add(std::move(n));
}

int ExprGraph::mul(int a, int b) {
  const Node& na = nodes_[a];
  const Node& nb = nodes_[b];
  if (na.op == Op::Const) return sum({{na.constant, b}});
  if (nb.op == Op::Const) return sum({{nb.constant, a}});
  Node n;
  n.op = Op::Prod;
  n.kids = {std::min(a, b), std::max(a, b)};  // canonical order
  return add(std::move(n));
}

int ExprGraph::pow(int a, int k) {
  if (k == 0) return constant(1.0);
  if (k == 1) return a;
  if (k < 0) return inv(pow(a, -k));
  const Node& na = nodes_[a];
  if (na.op == Op::Const) return constant(std::pow(na.constant, k));
  Node n;
  n.op = Op::Pow;
  n.ipow = k;
  n.kids = {a};
  return add(std::move(n));
}

int ExprGraph::unary(Op op, int a) {
  const Node& na = nodes_[a];
  if (na.op == Op::Const) return constant(applyUnary(op, na.constant));
  if (op == Op::Neg) return sum({{-1.0, a}});
  Node n;
  n.op = op;
  n.kids = {a};
  return add(std::move(n));
}

int ExprGraph::exp(int a) { return unary(Op::Exp, a); }
int ExprGraph::log(int a) { return unary(Op::Log, a); }
int ExprGraph::sqrt(int a) { return unary(Op::Sqrt, a); }
int ExprGraph::neg(int a) { return unary(Op::Neg, a); }
int ExprGraph::inv(int a) { return unary(Op::Inv, a); }

bool ExprGraph::isLinear(int root) const {
  const Node& n = nodes_[root];
  switch (n.op) {
    case Op::Const:
    case Op::Var:
      return true;
    case Op::Sum:
    case Op::Neg:
      for (int k : n.kids)
        if (!isLinear(k)) return false;
      return true;
    default:
      return false;
  }
}

std::vector<int> ExprGraph::reachable(int root) const {
  std::vector<char> seen(root + 1, 0);
  std::vector<int> stack = {root};
  seen[root] = 1;
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    for (int k : nodes_[id].kids)
      if (!seen[k]) {
        seen[k] = 1;
        stack.push_back(k);
      }
  }
  std::vector<int> out;
  for (int i = 0; i <= root; ++i)
    if (seen[i]) out.push_back(i);
  return out;
}

VarId ExprGraph::maxVar(int root) const {
  VarId m = -1;
  for (int id : reachable(root))
    if (nodes_[id].op == Op::Var) m = std::max(m, nodes_[id].var);
  return m;
}

void ExprGraph::collectVars(int root, std::vector<char>& seen) const {
  for (int id : reachable(root))
    if (nodes_[id].op == Op::Var && nodes_[id].var < (VarId)seen.size())
      seen[nodes_[id].var] = 1;
}

double applyUnary(Op op, double x) {
  switch (op) {
    case Op::Exp:
      return std::exp(x);
    case Op::Log:
      if (x <= 0.0) throw DomainError("log of nonpositive value");
      return std::log(x);
    case Op::Sqrt:
      if (x < 0.0) throw DomainError("sqrt of negative value");
      return std::sqrt(x);
    case Op::Neg:
      return -x;
    case Op::Inv:
      if (x == 0.0) throw DomainError("reciprocal of zero");
      return 1.0 / x;
    default:
      throw SolverFailure("applyUnary: not a unary op");
  }
}

ExprEval::ExprEval(const ExprGraph& g, int root) : g_(g), root_(root) {
  order_ = g.reachable(root);
  slot_.assign(root + 1, -1);
  for (size_t i = 0; i < order_.size(); ++i) slot_[order_[i]] = (int)i;
  val_.resize(order_.size());
  iv_.resize(order_.size());
}

void ExprEval::forward(const Point& p) {
  for (size_t i = 0; i < order_.size(); ++i) {
    const Node& n = g_.node(order_[i]);
    double v = 0.0;
    switch (n.op) {
      case Op::Const:
        v = n.constant;
        break;
      case Op::Var:
        v = p[n.var];
        break;
      case Op::Sum:
        v = n.constant;
        for (size_t k = 0; k < n.kids.size(); ++k)
          v += n.coeffs[k] * val_[slot_[n.kids[k]]];
        break;
      case Op::Prod:
        v = val_[slot_[n.kids[0]]] * val_[slot_[n.kids[1]]];
        break;
      case Op::Pow: {
        double b = val_[slot_[n.kids[0]]];
        v = 1.0;
        for (int e = 0; e < n.ipow; ++e) v *= b;
        break;
      }
      default:
        v = applyUnary(n.op, val_[slot_[n.kids[0]]]);
        break;
    }
    val_[i] = v;
  }
}

double ExprEval::value(const Point& p) {
  forward(p);
  return val_[slot_[root_]];
}

void ExprEval::gradient(const Point& p, std::vector<double>& out, int nvars) {
  forward(p);
  adj_.assign(order_.size(), 0.0);
  adj_[slot_[root_]] = 1.0;
  out.assign(nvars, 0.0);
  for (size_t ri = order_.size(); ri-- > 0;) {
    const Node& n = g_.node(order_[ri]);
    double a = adj_[ri];
    if (a == 0.0 && n.op != Op::Var) continue;
    switch (n.op) {
      case Op::Const:
        break;
      case Op::Var:
        out[n.var] += a;
        break;
      case Op::Sum:
        for (size_t k = 0; k < n.kids.size(); ++k)
          adj_[slot_[n.kids[k]]] += n.coeffs[k] * a;
        break;
      case Op::Prod:
        adj_[slot_[n.kids[0]]] += val_[slot_[n.kids[1]]] * a;
        adj_[slot_[n.kids[1]]] += val_[slot_[n.kids[0]]] * a;
        break;
      case Op::Pow: {
        double b = val_[slot_[n.kids[0]]];
        double d = n.ipow;
        for (int e = 1; e < n.ipow; ++e) d *= b;  // k * b^(k-1)
        adj_[slot_[n.kids[0]]] += d * a;
        break;
      }
      case Op::Exp:
        adj_[slot_[n.kids[0]]] += val_[ri] * a;
        break;
      case Op::Log:
        adj_[slot_[n.kids[0]]] += a / val_[slot_[n.kids[0]]];
        break;
      case Op::Sqrt:
        adj_[slot_[n.kids[0]]] += a / (2.0 * val_[ri]);
        break;
      case Op::Neg:
        adj_[slot_[n.kids[0]]] -= a;
        break;
      case Op::Inv: {
        double b = val_[slot_[n.kids[0]]];
        adj_[slot_[n.kids[0]]] -= a / (b * b);
        break;
      }
    }
  }
}

Interval ExprEval::interval(const Box& box) {
  for (size_t i = 0; i < order_.size(); ++i) {
    const Node& n = g_.node(order_[i]);
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
          v = v + n.coeffs[k] * iv_[slot_[n.kids[k]]];
        break;
      case Op::Prod:
        v = iv_[slot_[n.kids[0]]] * iv_[slot_[n.kids[1]]];
        break;
      case Op::Pow:
        v = ivPow(iv_[slot_[n.kids[0]]], n.ipow);
        break;
      case Op::Exp:
        v = ivExp(iv_[slot_[n.kids[0]]]);
        break;
      case Op::Log:
        v = ivLog(iv_[slot_[n.kids[0]]]);
        break;
      case Op::Sqrt:
        v = ivSqrt(iv_[slot_[n.kids[0]]]);
        break;
      case Op::Neg:
        v = -iv_[slot_[n.kids[0]]];
        break;
      case Op::Inv:
        v = ivRecip(iv_[slot_[n.kids[0]]]);
        break;
    }
    iv_[i] = v;
  }
  return iv_[slot_[root_]];
}

double evaluate(const ExprGraph& g, int root, const Point& p) {
  return ExprEval(g, root).value(p);
}

std::vector<double> gradient(const ExprGraph& g, int root, const Point& p,
                             int nvars) {
  std::vector<double> out;
  ExprEval(g, root).gradient(p, out, nvars);
  return out;
}

Interval intervalEval(const ExprGraph& g, int root, const Box& box) {
  return ExprEval(g, root).interval(box);
}

}  // namespace minlp
