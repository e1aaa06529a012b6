#pragma once

#include <unordered_map>

#include "minlp/mccormick.hpp"
#include "minlp/model.hpp"

namespace minlp {

enum class CutKind { OAObjective, OAConstraint, Envelope, NoGood };

// Affine inequality sum(terms) <= rhs over a unified id space: model
// variables first, auxiliary variables from nvars upward.
struct LinearCut {
  std::vector<std::pair<int, double>> terms;  // sorted by id, unique
  double rhs = 0.0;
  CutKind kind = CutKind::Envelope;
  std::string source;

  double activity(const Point& p) const {
    double a = 0.0;
    for (auto& [id, w] : terms) a += w * p[id];
    return a;
  }
  bool satisfied(const Point& p, double tol = 1e-7) const {
    return activity(p) <= rhs + tol;
  }
  void normalize();
};

// Linear row used by the LP layer and by AVM defining equalities.
struct LinRow {
  std::vector<std::pair<int, double>> terms;
  double rhs = 0.0;
  bool eq = false;
};

struct AuxVar {
  VarId id = -1;       // >= model nvars
  int node = -1;       // defining ExprGraph node
  Interval bounds;     // interval of the node over the decomposition box
};

// One z = op(children) row in variable space, children already mapped to
// original or auxiliary variable ids.
struct Factor {
  Op op = Op::Prod;
  int ipow = 0;
  VarId z = -1;
  std::vector<VarId> childvars;
  std::vector<Interval> childbounds;
  Interval zbounds;
};

struct AvmResult {
  int base_vars = 0;
  std::vector<AuxVar> aux;
  std::vector<Factor> factors;
  std::vector<LinRow> linear_rows;  // aliases for affine children (equalities)
  // Graph node -> affine form over unified ids (filled for every
  // decomposed node).
  std::unordered_map<int, LinRow> affine;

  int totalVars() const { return base_vars + (int)aux.size(); }
  Interval auxBound(VarId id) const { return aux[id - base_vars].bounds; }
  // Affine image of a constraint body / objective in unified space,
  // returned as terms plus constant (value = terms . v + rhs0).
  std::pair<std::vector<std::pair<int, double>>, double> affineOf(
      int node) const;
};

// Decomposes every nonlinear node reachable from the objective and the
// constraints. With allow_partial, factors over infinite intervals are
// skipped instead of raising UnboundedBox; skipped nodes produce no aux
// variable or cuts.
AvmResult avmDecompose(const Model& m, const Box& box,
                       bool allow_partial = false);

// Envelope cuts for every factor: the four bilinear planes for products,
// tangents of the univariate envelopes at {lo, mid, hi} plus the given
// extra points, and the opposite-side tangents. All cuts are valid for
// the factor graph over the box.
std::vector<LinearCut> convexificationCuts(
    const AvmResult& avm, const std::vector<double>& extra_points = {});

// Same support and coefficients up to a small relative tolerance; used
// to keep cut pools free of duplicates.
bool cutsEquivalent(const LinearCut& a, const LinearCut& b,
                    double tol = 1e-7);

// Excludes exactly the binary assignment y (in <= 0 normalized form).
LinearCut noGoodCut(const Model& m, const Point& y);

// cv(point) + cv_sub . (v - point) <= epi_var; with epi_var < 0 the cut
// reads ... <= 0 (valid relaxation of expr <= 0).
LinearCut affineUnderestimator(const ExprGraph& g, int root, const Box& box,
                               const Point& point, int nvars,
                               int epi_var = -1);
LinearCut affineOverestimator(const ExprGraph& g, int root, const Box& box,
                              const Point& point, int nvars, int epi_var = -1);

std::string cutsToJsonl(const std::vector<LinearCut>& cuts, const Model& m);

}  // namespace minlp
