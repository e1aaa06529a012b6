#pragma once

#include <iosfwd>

#include "minlp/fbbt.hpp"
#include "minlp/lp.hpp"

namespace minlp {

// LP relaxation in the unified (model + auxiliary) variable space:
// objective and constraint bodies with nonlinear nodes replaced by their
// auxiliary variables, AVM defining equalities, envelope cuts, and the
// box plus auxiliary bounds.
LinearProgram buildRelaxationLp(const Model& m, const Box& box,
                                const AvmResult& avm,
                                const std::vector<LinearCut>& cuts);

struct ObbtResult {
  Box box;
  bool infeasible = false;
  int lp_count = 0;
};

// Min/max each target variable over the linear relaxation; bounds only
// ever tighten. parallel selects the OpenMP path; both paths produce
// identical boxes (targets are independent, merged by intersection).
ObbtResult obbt(const Model& m, const AvmResult& avm,
                const std::vector<LinearCut>& cuts, const Box& box,
                const std::vector<VarId>& targets, bool parallel = true);

enum class PresolveStatus { Tightened, ProvenInfeasible };

struct PresolveOptions {
  int fbbt_max_passes = 10;
  double fbbt_min_reduction = 1e-3;
  bool run_obbt = true;
  bool parallel_obbt = true;
  bool allow_partial = true;  // tolerate infinite intervals (no cuts there)
  std::vector<double> tangent_points;  // extra envelope tangent abscissae
  std::ostream* trace = nullptr;       // JSON lines, one per pass
};

struct PresolveResult {
  PresolveStatus status = PresolveStatus::Tightened;
  Box tightened;
  AvmResult avm;  // decomposition over the tightened box
  std::vector<LinearCut> cuts;
  int passes = 0;
  int lp_count = 0;
  double wall_time_s = 0.0;
};

// FBBT -> AVM + convexification cuts -> OBBT over the cut LP -> final
// FBBT pass, with the decomposition rebuilt on the final box.
PresolveResult presolve(const Model& m, const PresolveOptions& opt = {});

}  // namespace minlp
