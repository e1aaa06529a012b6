#include "minlp/model.hpp"

#include <algorithm>
#include <cmath>

namespace minlp {

Box Model::bounds() const {
  Box b(vars_.size());
  for (const auto& v : vars_) b[v.id] = {v.lower, v.upper};
  return b;
}

bool Model::hasDiscrete() const {
  return std::any_of(vars_.begin(), vars_.end(),
                     [](const Variable& v) { return v.discrete(); });
}

std::vector<VarId> Model::discreteVars() const {
  std::vector<VarId> out;
  for (const auto& v : vars_)
    if (v.discrete()) out.push_back(v.id);
  return out;
}

std::vector<VarId> Model::nonlinearVars() const {
  std::vector<char> seen(vars_.size(), 0);
  if (!graph_->isLinear(objective_)) graph_->collectVars(objective_, seen);
  for (const auto& c : cons_)
    if (!c.is_linear) graph_->collectVars(c.body, seen);
  std::vector<VarId> out;
  for (size_t i = 0; i < seen.size(); ++i)
    if (seen[i]) out.push_back(static_cast<VarId>(i));
  return out;
}

double Model::maxViolation(const Point& p) const {
  double v = 0.0;
  for (const auto& c : cons_)
    v = std::max(v, evaluate(*graph_, c.body, p));
  for (const auto& var : vars_) {
    v = std::max(v, var.lower - p[var.id]);
    v = std::max(v, p[var.id] - var.upper);
  }
  return v;
}

Interval roundIntegerInterval(const Interval& iv) {
  constexpr double tol = 1e-9;
  double lo = std::isfinite(iv.lo) ? std::ceil(iv.lo - tol) : iv.lo;
  double hi = std::isfinite(iv.hi) ? std::floor(iv.hi + tol) : iv.hi;
  return {lo, hi};
}

VarId ModelBuilder::addVar(const std::string& name, Domain domain,
                           double lower, double upper) {
  if (domain == Domain::Binary) {
    lower = 0.0;
    upper = 1.0;
  }
  if (domain == Domain::Integer) {
    Interval iv = roundIntegerInterval({lower, upper});
    lower = iv.lo;
    upper = iv.hi;
  }
  if (lower > upper)
    throw AssignmentError("variable '" + name + "': lower > upper");
  Variable v;
  v.id = static_cast<VarId>(vars_.size());
  v.name = name;
  v.domain = domain;
  v.lower = lower;
  v.upper = upper;
  vars_.push_back(std::move(v));
  return vars_.back().id;
}

void ModelBuilder::addConstraint(int expr, Sense sense, double rhs) {
  int body = graph_->sum({{1.0, expr}}, -rhs);
  cons_.push_back({body, graph_->isLinear(body), (int)cons_.size()});
  if (sense == Sense::Eq) {
    int negbody = graph_->neg(body);
    cons_.push_back({negbody, graph_->isLinear(negbody), (int)cons_.size()});
  }
}

Model ModelBuilder::build() {
  if (vars_.empty()) throw AssignmentError("model has no variables");
  if (objective_ < 0) objective_ = graph_->constant(0.0);
  int n = static_cast<int>(vars_.size());
  if (graph_->maxVar(objective_) >= n)
    throw AssignmentError("objective references undeclared variable");
  for (const auto& c : cons_)
    if (graph_->maxVar(c.body) >= n)
      throw AssignmentError("constraint references undeclared variable");
  Model m;
  m.name_ = name_;
  m.convexity_ = convexity_;
  m.graph_ = graph_;
  m.vars_ = vars_;
  m.objective_ = objective_;
  m.cons_ = cons_;
  return m;
}

Model fixIntegers(const Model& m, const Point& y) {
  if (y.size() != static_cast<size_t>(m.nvars()))
    throw AssignmentError("assignment length mismatch");
  Model out = m;
  for (auto& v : out.vars_) {
    if (!v.discrete()) continue;
    double val = y[v.id];
    if (std::fabs(val - std::round(val)) > 1e-6)
      throw AssignmentError("non-integral assignment for '" + v.name + "'");
    val = std::round(val);
    if (val < v.lower - 1e-9 || val > v.upper + 1e-9)
      throw AssignmentError("assignment out of bounds for '" + v.name + "'");
    v.domain = Domain::Continuous;
    v.lower = v.upper = val;
  }
  return out;
}

Model makeFeasibility(const Model& m, const Point& y, Norm norm) {
  Model fixed = fixIntegers(m, y);
  Model out;
  out.name_ = m.name_ + "/feas";
  out.convexity_ = m.convexity_;
  auto g = std::make_shared<ExprGraph>(*m.graphPtr());
  out.vars_ = fixed.vars_;
  int nbase = static_cast<int>(out.vars_.size());

  std::vector<int> nonlinear_rows;
  for (const auto& c : fixed.cons_)
    if (!c.is_linear) nonlinear_rows.push_back(c.index);

  std::vector<std::pair<double, int>> obj_terms;
  int shared_slack = -1;
  if (norm == Norm::Linf && !nonlinear_rows.empty()) {
    Variable s;
    s.id = static_cast<VarId>(out.vars_.size());
    s.name = "_s";
    s.lower = 0.0;
    s.upper = kInf;
    out.vars_.push_back(s);
    shared_slack = s.id;
    obj_terms.emplace_back(1.0, g->var(s.id));
  }

  int next = 0;
  for (const auto& c : fixed.cons_) {
    if (c.is_linear) {
      out.cons_.push_back({c.body, true, (int)out.cons_.size()});
      continue;
    }
    VarId sid;
    if (norm == Norm::L1) {
      Variable s;
      s.id = static_cast<VarId>(out.vars_.size());
      s.name = "_s" + std::to_string(next++);
      s.lower = 0.0;
      s.upper = kInf;
      out.vars_.push_back(s);
      sid = s.id;
      obj_terms.emplace_back(1.0, g->var(sid));
    } else {
      sid = shared_slack;
    }
    int body = g->sum({{1.0, c.body}, {-1.0, g->var(sid)}});
    out.cons_.push_back({body, false, (int)out.cons_.size()});
  }
  out.objective_ = g->sum(obj_terms);
  out.graph_ = g;
  (void)nbase;
  return out;
}

Model relaxIntegrality(const Model& m) {
  Model out = m;
  for (auto& v : out.vars_) v.domain = Domain::Continuous;
  return out;
}

Model epigraphReformulation(const Model& m, VarId* mu_out) {
  Model out;
  out.name_ = m.name_ + "/epi";
  out.convexity_ = m.convexity_;
  auto g = std::make_shared<ExprGraph>(*m.graphPtr());
  out.vars_ = m.vars_;
  Variable mu;
  mu.id = static_cast<VarId>(out.vars_.size());
  mu.name = "_mu";
  mu.lower = -1e12;
  mu.upper = 1e12;
  out.vars_.push_back(mu);
  out.cons_ = m.cons_;
  int body = g->sum({{1.0, m.objective_}, {-1.0, g->var(mu.id)}});
  out.cons_.push_back({body, g->isLinear(body), (int)out.cons_.size()});
  out.objective_ = g->var(mu.id);
  out.graph_ = g;
  if (mu_out) *mu_out = mu.id;
  return out;
}

Model binaryExpansion(const Model& m) {
  Model out;
  out.name_ = m.name_ + "/bin";
  out.convexity_ = m.convexity_;
  auto g = std::make_shared<ExprGraph>(*m.graphPtr());
  out.vars_ = m.vars_;
  out.cons_ = m.cons_;
  out.objective_ = m.objective_;
  for (VarId v = 0; v < m.nvars(); ++v) {
    if (out.vars_[v].domain != Domain::Integer) continue;
    if (out.vars_[v].lower == out.vars_[v].upper) {
      out.vars_[v].domain = Domain::Continuous;
      continue;
    }
    if (!std::isfinite(out.vars_[v].lower) ||
        !std::isfinite(out.vars_[v].upper))
      throw UnboundedBox("binary expansion needs finite integer bounds");
    double range = out.vars_[v].upper - out.vars_[v].lower;
    if (range == 1.0 && out.vars_[v].lower == 0.0) {
      out.vars_[v].domain = Domain::Binary;
      continue;
    }
    int bits = 0;
    while ((1LL << bits) - 1 < (long long)range) ++bits;
    std::vector<std::pair<double, int>> terms;
    terms.emplace_back(1.0, g->var(v));
    for (int k = 0; k < bits; ++k) {
      Variable b;
      b.id = static_cast<VarId>(out.vars_.size());
      b.name = out.vars_[v].name + "_b" + std::to_string(k);
      b.domain = Domain::Binary;
      b.lower = 0.0;
      b.upper = 1.0;
      out.vars_.push_back(b);
      terms.emplace_back(-double(1LL << k), g->var(b.id));
    }
    int body = g->sum(terms, -out.vars_[v].lower);
    out.cons_.push_back({body, true, (int)out.cons_.size()});
    int negbody = g->neg(body);
    out.cons_.push_back({negbody, true, (int)out.cons_.size()});
    out.vars_[v].domain = Domain::Continuous;
  }
  out.graph_ = g;
  return out;
}

Model extendedWithRows(
    const Model& m,
    const std::function<std::vector<int>(ExprGraph&)>& make_bodies) {
  Model out;
  out.name_ = m.name_;
  out.convexity_ = m.convexity_;
  auto g = std::make_shared<ExprGraph>(*m.graphPtr());
  out.vars_ = m.vars_;
  out.cons_ = m.cons_;
  out.objective_ = m.objective_;
  for (int body : make_bodies(*g))
    out.cons_.push_back({body, g->isLinear(body), (int)out.cons_.size()});
  out.graph_ = g;
  return out;
}

Model withBounds(const Model& m, const Box& box) {
  Model out = m;
  for (auto& v : out.vars_) {
    v.lower = box[v.id].lo;
    v.upper = box[v.id].hi;
  }
  return out;
}

}  // namespace minlp
