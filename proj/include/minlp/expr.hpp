#pragma once

#include <cstdint>
#include <memory>
#include <unordered_map>
#include <vector>

#include "minlp/common.hpp"
#include "minlp/interval.hpp"

namespace minlp {

enum class Op : uint8_t {
  Const,  // constant value
  Var,    // model variable
  Sum,    // constant + sum of coeff * child
  Prod,   // child0 * child1
  Pow,    // child ^ k, integer k >= 2
  Exp,
  Log,
  Sqrt,
  Neg,
  Inv,    // 1 / child
};

struct Node {
  Op op = Op::Const;
  double constant = 0.0;          // Const value, or Sum offset
  VarId var = -1;                 // Var only
  int ipow = 0;                   // Pow only
  std::vector<int> kids;
  std::vector<double> coeffs;     // Sum only, parallel to kids

  bool operator==(const Node& o) const;
};

// Hash-consed expression DAG. Node ids are topologically ordered: every
// child id is smaller than its parent's. Graphs are append-only and
// immutable nodes are shared, so identical subtrees get one node.
class ExprGraph {
 public:
  int add(Node n);

  int constant(double v);
  int var(VarId v);
  // Affine combination; folds constants, flattens nested sums, drops
  // zero coefficients.
  int sum(std::vector<std::pair<double, int>> terms, double offset = 0.0);
  int mul(int a, int b);
  int pow(int a, int k);  // any integer k; normalized to k >= 2 nodes
  int exp(int a);
  int log(int a);
  int sqrt(int a);
  int neg(int a);
  int inv(int a);
  int sub(int a, int b) { return sum({{1.0, a}, {-1.0, b}}); }
  int addExpr(int a, int b) { return sum({{1.0, a}, {1.0, b}}); }

  const Node& node(int id) const { return nodes_[id]; }
  int size() const { return static_cast<int>(nodes_.size()); }

  bool isLinear(int root) const;
  // Node ids reachable from root, ascending (valid evaluation order).
  std::vector<int> reachable(int root) const;
  // Largest VarId referenced, -1 if none.
  VarId maxVar(int root) const;
  void collectVars(int root, std::vector<char>& seen) const;

 private:
  int unary(Op op, int a);
  std::vector<Node> nodes_;
  std::unordered_map<uint64_t, std::vector<int>> index_;
  uint64_t nodeHash(const Node& n) const;
};

using Point = std::vector<double>;

// Single-expression evaluator owning its scratch buffers. One instance
// per thread; the graph itself is shared read-only.
class ExprEval {
 public:
  ExprEval(const ExprGraph& g, int root);

  double value(const Point& p);
  // Dense gradient over [0, nvars); entries for absent variables are 0.
  void gradient(const Point& p, std::vector<double>& out, int nvars);
  Interval interval(const Box& box);

  int root() const { return root_; }
  const std::vector<int>& order() const { return order_; }

 private:
  const ExprGraph& g_;
  int root_;
  std::vector<int> order_;
  std::vector<int> slot_;           // node id -> index in order_, or -1
  std::vector<double> val_;
  std::vector<double> adj_;
  std::vector<Interval> iv_;
  void forward(const Point& p);
};

double evaluate(const ExprGraph& g, int root, const Point& p);
std::vector<double> gradient(const ExprGraph& g, int root, const Point& p,
                             int nvars);
Interval intervalEval(const ExprGraph& g, int root, const Box& box);

// Node-level point semantics, shared by evaluators and FBBT.
double applyUnary(Op op, double x);  // throws DomainError off-domain

}  // namespace minlp
