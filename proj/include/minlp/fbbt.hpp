#pragma once

#include "minlp/model.hpp"

namespace minlp {

struct FbbtResult {
  Box box;
  bool infeasible = false;
  int passes = 0;
};

// Forward-backward interval propagation over every constraint DAG to a
// fixpoint. The result contains every feasible point of the input box;
// integer bounds are rounded inward. infeasible=true certifies the box
// holds no feasible point.
FbbtResult fbbt(const Model& m, Box box, int max_passes = 10,
                double min_reduction = 1e-3);

}  // namespace minlp
