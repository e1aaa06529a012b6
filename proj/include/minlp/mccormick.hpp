#pragma once

#include <functional>

#include "minlp/expr.hpp"

namespace minlp {

// Convex/concave relaxation value at a point, with subgradients over the
// model variables. Sandwich invariant: cv <= true value <= cc on the box.
struct McCormickValue {
  Interval iv;
  double cv = 0.0;
  double cc = 0.0;
  std::vector<double> cv_sub;
  std::vector<double> cc_sub;
};

McCormickValue mccormickEval(const ExprGraph& g, int root, const Box& box,
                             const Point& point, int nvars);

// Univariate convex/concave envelope of a single node op over a finite
// child interval. Tangents of cv are global underestimators of the op,
// tangents of cc global overestimators.
struct UniEnv {
  std::function<double(double)> cv, cvd;  // convex envelope value / slope
  std::function<double(double)> cc, ccd;  // concave envelope value / slope
  double xmin = 0.0;  // argmin of cv over the interval
  double xmax = 0.0;  // argmax of cc over the interval
};

// op in {Pow, Exp, Log, Sqrt, Inv}; throws EmptyDomain/UnboundedBox when
// the interval does not admit an envelope.
UniEnv makeEnvelope(Op op, int ipow, Interval child);

}  // namespace minlp
