#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "minlp/expr.hpp"

namespace minlp {

enum class Domain { Continuous, Integer, Binary };
enum class Sense { Leq, Eq };
enum class Convexity { DeclaredConvex, Unknown };
enum class Norm { L1, Linf };

struct Variable {
  VarId id = -1;
  std::string name;
  Domain domain = Domain::Continuous;
  double lower = -kInf;
  double upper = kInf;

  bool discrete() const { return domain != Domain::Continuous; }
};

// Stored normalized: body <= 0. Equalities are split into two rows at
// build time.
struct Constraint {
  int body = -1;        // ExprGraph root
  bool is_linear = false;
  int index = -1;
};

class Model {
 public:
  const std::string& name() const { return name_; }
  Convexity convexity() const { return convexity_; }
  int nvars() const { return static_cast<int>(vars_.size()); }
  const Variable& var(VarId v) const { return vars_[v]; }
  const std::vector<Variable>& vars() const { return vars_; }
  const ExprGraph& graph() const { return *graph_; }
  std::shared_ptr<const ExprGraph> graphPtr() const { return graph_; }
  int objective() const { return objective_; }
  const std::vector<Constraint>& constraints() const { return cons_; }

  Box bounds() const;
  bool hasDiscrete() const;
  std::vector<VarId> discreteVars() const;
  // Variables appearing in any nonlinear constraint body or a nonlinear
  // objective.
  std::vector<VarId> nonlinearVars() const;

  double maxViolation(const Point& p) const;

 private:
  friend class ModelBuilder;
  friend Model fixIntegers(const Model&, const Point&);
  friend Model makeFeasibility(const Model&, const Point&, Norm);
  friend Model relaxIntegrality(const Model&);
  friend Model withBounds(const Model&, const Box&);
  friend Model epigraphReformulation(const Model&, VarId*);
  friend Model binaryExpansion(const Model&);
  friend Model extendedWithRows(
      const Model&, const std::function<std::vector<int>(ExprGraph&)>&);

  std::string name_;
  Convexity convexity_ = Convexity::Unknown;
  std::shared_ptr<ExprGraph> graph_;
  std::vector<Variable> vars_;
  int objective_ = -1;
  std::vector<Constraint> cons_;
};

class ModelBuilder {
 public:
  explicit ModelBuilder(std::string name = "model")
      : name_(std::move(name)), graph_(std::make_shared<ExprGraph>()) {}

  VarId addVar(const std::string& name, Domain domain, double lower,
               double upper);
  ExprGraph& graph() { return *graph_; }
  void setObjective(int expr) { objective_ = expr; }
  void addConstraint(int expr, Sense sense, double rhs);
  void setConvexity(Convexity c) { convexity_ = c; }

  Model build();

 private:
  std::string name_;
  Convexity convexity_ = Convexity::Unknown;
  std::shared_ptr<ExprGraph> graph_;
  std::vector<Variable> vars_;
  int objective_ = -1;
  std::vector<Constraint> cons_;
};

// Collapses every discrete variable's bounds to its value in y; the
// resulting model is purely continuous. Structure is shared.
Model fixIntegers(const Model& m, const Point& y);

// Feasibility subproblem: minimize a norm of slacks attached to the
// nonlinear rows (linear rows stay hard). Discrete variables are fixed
// to y first.
Model makeFeasibility(const Model& m, const Point& y, Norm norm);

Model relaxIntegrality(const Model& m);

// Same model with replaced variable bounds (used to install tightened
// boxes).
Model withBounds(const Model& m, const Box& box);

// Rounds an interval inward to integrality; may come back empty.
Interval roundIntegerInterval(const Interval& iv);

// min f -> min mu s.t. f - mu <= 0 with mu appended as the last
// variable. mu gets large finite bounds so box-based machinery stays
// applicable.
Model epigraphReformulation(const Model& m, VarId* mu_out = nullptr);

// Replaces every general integer variable y in [L, U] by binaries b_k
// with y = L + sum 2^k b_k (two <= rows); y itself becomes continuous.
// Binary variables are left alone.
Model binaryExpansion(const Model& m);

// Clones the model and appends <= 0 rows whose bodies are produced by
// the callback inside the cloned graph.
Model extendedWithRows(
    const Model& m,
    const std::function<std::vector<int>(ExprGraph&)>& make_bodies);

}  // namespace minlp
