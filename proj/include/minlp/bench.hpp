#pragma once

#include <iosfwd>

#include "minlp/oa.hpp"

namespace minlp::bench {

// Exhaustive integer enumeration with an independent derivative-free
// continuous refinement (penalty projected descent on finite-difference
// gradients plus coarse grids). Deliberately shares nothing with the
// solver stack beyond expression evaluation, so it can serve as an
// oracle in tests. Returns +inf when no assignment admits a feasible
// point.
double enumerationOracle(const Model& m, Point* argmin = nullptr);

struct GeneratedInstance {
  std::string file;  // relative to the output directory
  Model model;
  double oracle = kInf;
};

// Deterministic random instances: binaries plus box-bounded continuous
// variables, affine and separable convex rows anchored at a feasible
// point; the nonconvex family adds bilinear terms. When out_dir is
// nonempty the models, a manifest.json and an oracle.json are written
// there.
std::vector<GeneratedInstance> generateInstances(bool nonconvex, int count,
                                                 unsigned seed,
                                                 const std::string& out_dir);

struct RunConfig {
  std::string label;
  SolverOptions options;
};

// Labels follow the convention: optional "C-" prefix enables
// convexification, core name OA | LP/NLP-B&B | GOA | GLP/NLP-B&B (or
// oa|lpnlp|goa|glpnlp), optional "(r)"/"(c)" subproblem-scale suffix.
RunConfig parseConfigLabel(const std::string& label);

struct RunRecord {
  std::string instance;
  std::string config;
  std::string status;
  double objective = kInf;
  double lb = -kInf;
  double ub = kInf;
  int iterations = 0;  // fixed-integer subproblem solves
  double time_s = 0.0;
};

// Full cross product, one row per (instance, config); failures become
// status rows. Rows come back sorted by (instance, config) regardless of
// the parallel schedule.
std::vector<RunRecord> runBench(const std::vector<std::string>& files,
                                const std::vector<RunConfig>& configs,
                                double time_limit_s = 60.0,
                                bool parallel = true,
                                std::ostream* warnings = nullptr);

RunRecord runOne(const std::string& file, const RunConfig& config,
                 double time_limit_s);

void writeRunCsv(std::ostream& os, const std::vector<RunRecord>& rows);
std::vector<RunRecord> readRunCsv(std::istream& is);

struct ProfileTable {
  std::vector<std::string> configs;
  std::vector<double> ratios;  // ascending, >= 1
  // fractions[r][c]: share of instances with ratio <= ratios[r] under
  // configs[c].
  std::vector<std::vector<double>> fractions;
};

// Dolan-More ratio profile; rows that are not "optimal" get ratio
// infinity and only show up in the asymptote.
ProfileTable computeProfile(const std::vector<RunRecord>& rows,
                            bool metric_time);

void writeProfileCsv(std::ostream& os, const ProfileTable& t);

}  // namespace minlp::bench
