#include "minlp/bench.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "json.hpp"
#include "minlp/model_json.hpp"

namespace minlp::bench {

namespace {

// ---------------------------------------------------------------------
// Enumeration oracle. Function values come from plain expression
// evaluation; all derivatives are finite differences, so nothing here
// depends on the AD, relaxation, or solver code paths.

struct OracleEval {
  const Model& m;
  Box box;
  std::vector<int> free_ids;

  explicit OracleEval(const Model& model) : m(model), box(model.bounds()) {
    for (int i = 0; i < m.nvars(); ++i)
      if (box[i].lo < box[i].hi) free_ids.push_back(i);
  }

  double objective(const Point& p) const {
    try {
      return evaluate(m.graph(), m.objective(), p);
    } catch (const DomainError&) {
      return kInf;
    }
  }
  double violation(const Point& p) const {
    double v = 0.0;
    for (const auto& c : m.constraints()) {
      try {
        v = std::max(v, evaluate(m.graph(), c.body, p));
      } catch (const DomainError&) {
        return kInf;
      }
    }
    return v;
  }
  // Shifted quadratic penalty: multipliers keep the conditioning mild
  // while still driving the violation to ~0.
  double merit(const Point& p, double rho,
               const std::vector<double>& lam) const {
    double v = objective(p);
    if (!std::isfinite(v)) return kInf;
    size_t j = 0;
    for (const auto& c : m.constraints()) {
      double g;
      try {
        g = evaluate(m.graph(), c.body, p);
      } catch (const DomainError&) {
        return kInf;
      }
      double t = std::max(0.0, lam[j] + rho * g);
      v += (t * t - lam[j] * lam[j]) / (2.0 * rho);
      ++j;
    }
    return v;
  }

  void project(Point& p) const {
    for (int i : free_ids) p[i] = std::clamp(p[i], box[i].lo, box[i].hi);
  }

  // Central finite differences on the free coordinates only.
  void fdGradient(const Point& p, double rho, const std::vector<double>& lam,
                  std::vector<double>& g) const {
    g.assign(m.nvars(), 0.0);
    Point q = p;
    for (int i : free_ids) {
      double h = 1e-6 * (1.0 + std::fabs(p[i]));
      q[i] = p[i] + h;
      double fp = merit(q, rho, lam);
      q[i] = p[i] - h;
      double fm = merit(q, rho, lam);
      q[i] = p[i];
      g[i] = (fp - fm) / (2.0 * h);
    }
  }
};

// Multiplier-corrected penalty loop with a monotone backtracking
// projected-descent inner solve.
void penaltyDescent(const OracleEval& ev, Point& p) {
  size_t ncons = ev.m.constraints().size();
  std::vector<double> lam(ncons, 0.0), g;
  double rho = 10.0;
  double prev_viol = kInf;
  for (int outer = 0; outer < 25; ++outer) {
    double f = ev.merit(p, rho, lam);
    if (!std::isfinite(f)) return;
    for (int it = 0; it < 200; ++it) {
      ev.fdGradient(p, rho, lam, g);
      double gn = 0.0;
      for (int i : ev.free_ids) gn = std::max(gn, std::fabs(g[i]));
      if (gn < 1e-11) break;
      double step = 1.0 / gn;
      bool moved = false;
      for (int bt = 0; bt < 40; ++bt) {
        Point q = p;
        for (int i : ev.free_ids) q[i] = p[i] - step * g[i];
        ev.project(q);
        double fq = ev.merit(q, rho, lam);
        if (fq < f - 1e-15) {
          p = q;
          f = fq;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    double viol = 0.0;
    size_t j = 0;
    for (const auto& c : ev.m.constraints()) {
      double gc;
      try {
        gc = evaluate(ev.m.graph(), c.body, p);
      } catch (const DomainError&) {
        return;
      }
      lam[j] = std::max(0.0, lam[j] + rho * gc);
      viol = std::max(viol, gc);
      ++j;
    }
    if (viol <= 1e-10 && outer >= 3) break;
    if (viol > 0.25 * prev_viol) rho = std::min(rho * 5.0, 1e8);
    prev_viol = viol;
  }
}

double continuousMin(const Model& fixed, Point& best_point,
                     unsigned start_seed) {
  OracleEval ev(fixed);
  const std::vector<double> zero_lam(fixed.constraints().size(), 0.0);
  int n = fixed.nvars();
  Point anchor(n);
  for (int i = 0; i < n; ++i) anchor[i] = ev.box[i].mid();
  std::vector<Point> starts{anchor};
  std::mt19937 rng(start_seed);
  for (int s = 0; s < 3; ++s) {
    Point p = anchor;
    for (int i : ev.free_ids) {
      std::uniform_real_distribution<double> d(ev.box[i].lo, ev.box[i].hi);
      p[i] = d(rng);
    }
    starts.push_back(std::move(p));
  }
  if (ev.free_ids.size() >= 1 && ev.free_ids.size() <= 3) {
    // Coarse grid, keep the best few corners as extra starts.
    std::vector<std::pair<double, Point>> grid;
    std::vector<int> idx(ev.free_ids.size(), 0);
    const int K = 5;
    while (true) {
      Point p = anchor;
      for (size_t d = 0; d < idx.size(); ++d) {
        int i = ev.free_ids[d];
        p[i] = ev.box[i].lo + ev.box[i].width() * idx[d] / (K - 1);
      }
      grid.emplace_back(ev.merit(p, 1e4, zero_lam), p);
      size_t d = 0;
      for (; d < idx.size(); ++d) {
        if (++idx[d] < K) break;
        idx[d] = 0;
      }
      if (d == idx.size()) break;
    }
    std::sort(grid.begin(), grid.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (size_t k = 0; k < grid.size() && k < 4; ++k)
      starts.push_back(grid[k].second);
  }

  double best = kInf;
  for (Point p : starts) {
    ev.project(p);
    penaltyDescent(ev, p);
    if (ev.violation(p) > 1e-6) continue;
    double v = ev.objective(p);
    if (v < best) {
      best = v;
      best_point = p;
    }
  }
  return best;
}

}  // namespace

double enumerationOracle(const Model& m, Point* argmin) {
  std::vector<VarId> disc = m.discreteVars();
  std::vector<long long> lo(disc.size()), width(disc.size());
  double combos = 1.0;
  for (size_t k = 0; k < disc.size(); ++k) {
    const Variable& v = m.var(disc[k]);
    if (!std::isfinite(v.lower) || !std::isfinite(v.upper))
      throw UnboundedBox("enumeration oracle needs finite integer bounds");
    lo[k] = std::llround(v.lower);
    width[k] = std::llround(v.upper) - lo[k] + 1;
    combos *= (double)width[k];
  }
  if (combos > (double)(1 << 20))
    throw AssignmentError("too many integer combinations to enumerate");

  double best = kInf;
  Point best_point;
  std::vector<long long> ctr(disc.size(), 0);
  unsigned assignment = 0;
  while (true) {
    Point y(m.nvars(), 0.0);
    for (size_t k = 0; k < disc.size(); ++k)
      y[disc[k]] = (double)(lo[k] + ctr[k]);
    Model fx = fixIntegers(m, y);
    Point pt;
    double val = continuousMin(fx, pt, 977u + 131u * assignment++);
    if (val < best) {
      best = val;
      best_point = pt;
    }
    size_t d = 0;
    for (; d < disc.size(); ++d) {
      if (++ctr[d] < width[d]) break;
      ctr[d] = 0;
    }
    if (d == disc.size() || disc.empty()) break;
  }
  if (argmin && std::isfinite(best)) *argmin = best_point;
  return best;
}

// ---------------------------------------------------------------------
// Instance generation.

std::vector<GeneratedInstance> generateInstances(bool nonconvex, int count,
                                                 unsigned seed,
                                                 const std::string& out_dir) {
  std::mt19937 rng(seed);
  auto uni = [&](double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
  };
  auto uniInt = [&](int a, int b) {
    return std::uniform_int_distribution<int>(a, b)(rng);
  };

  std::vector<GeneratedInstance> out;
  for (int inst = 0; inst < count; ++inst) {
    int nb = uniInt(2, nonconvex ? 4 : 6);
    int nc = nonconvex ? uniInt(2, 3) : uniInt(2, 6);
    ModelBuilder b((nonconvex ? "nonconvex_" : "convex_") +
                   std::to_string(inst));
    std::vector<VarId> xs, ys;
    for (int i = 0; i < nc; ++i)
      xs.push_back(b.addVar("x" + std::to_string(i), Domain::Continuous,
                            -3.0, 3.0));
    for (int i = 0; i < nb; ++i)
      ys.push_back(b.addVar("y" + std::to_string(i), Domain::Binary, 0, 1));
    ExprGraph& g = b.graph();

    // Feasibility anchor inside the box.
    std::vector<double> ax(nc), ay(nb);
    for (int i = 0; i < nc; ++i) ax[i] = uni(-2.0, 2.0);
    for (int i = 0; i < nb; ++i) ay[i] = (double)uniInt(0, 1);

    std::vector<std::pair<double, int>> obj;
    double fudge = 0.0;
    for (int i = 0; i < nc; ++i) {
      double c = uni(-2.0, 2.0), q = uni(0.5, 2.0);
      obj.emplace_back(c, g.var(xs[i]));
      obj.emplace_back(q, g.pow(g.var(xs[i]), 2));
    }
    for (int i = 0; i < nb; ++i)
      obj.emplace_back(uni(-2.0, 2.0), g.var(ys[i]));
    if (nonconvex) {
      int pairs = uniInt(1, 2);
      for (int p = 0; p < pairs; ++p) {
        int i = uniInt(0, nc - 1), j = uniInt(0, nc - 1);
        if (i == j) j = (j + 1) % nc;
        obj.emplace_back(uni(-1.5, 1.5),
                         g.mul(g.var(xs[i]), g.var(xs[j])));
      }
    }
    b.setObjective(g.sum(obj));

    int nrows = uniInt(2, 4);
    for (int r = 0; r < nrows; ++r) {
      std::vector<std::pair<double, int>> row;
      double at_anchor = 0.0;
      for (int i = 0; i < nc; ++i) {
        double a = uni(-1.0, 1.0);
        row.emplace_back(a, g.var(xs[i]));
        at_anchor += a * ax[i];
      }
      for (int i = 0; i < nb; ++i) {
        double a = uni(-1.0, 1.0);
        row.emplace_back(a, g.var(ys[i]));
        at_anchor += a * ay[i];
      }
      b.addConstraint(g.sum(row), Sense::Leq, at_anchor + uni(0.5, 2.0));
    }
    int nconv = uniInt(1, 2);
    for (int r = 0; r < nconv; ++r) {
      std::vector<std::pair<double, int>> row;
      double at_anchor = 0.0;
      for (int i = 0; i < nc; ++i) {
        double s = uni(0.2, 1.0);
        row.emplace_back(s, g.pow(g.var(xs[i]), 2));
        at_anchor += s * ax[i] * ax[i];
      }
      for (int i = 0; i < nb; ++i) {
        double a = uni(-1.0, 1.0);
        row.emplace_back(a, g.var(ys[i]));
        at_anchor += a * ay[i];
      }
      b.addConstraint(g.sum(row), Sense::Leq, at_anchor + uni(0.5, 2.0));
    }
    if (nonconvex) {
      int i = uniInt(0, nc - 1), j = (i + 1) % nc;
      std::vector<std::pair<double, int>> row;
      double w = uni(0.5, 1.5);
      row.emplace_back(w, g.mul(g.var(xs[i]), g.var(xs[j])));
      double at_anchor = w * ax[i] * ax[j];
      for (int k = 0; k < nb; ++k) {
        double a = uni(-1.0, 1.0);
        row.emplace_back(a, g.var(ys[k]));
        at_anchor += a * ay[k];
      }
      b.addConstraint(g.sum(row), Sense::Leq, at_anchor + uni(0.5, 2.0));
    }
    b.setConvexity(nonconvex ? Convexity::Unknown
                             : Convexity::DeclaredConvex);

    GeneratedInstance gi;
    gi.model = b.build();
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_%03d.json",
                  nonconvex ? "nonconvex" : "convex", inst);
    gi.file = buf;
    gi.oracle = enumerationOracle(gi.model);
    out.push_back(std::move(gi));
  }

  if (!out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    nlohmann::json manifest, oracle;
    manifest["instances"] = nlohmann::json::array();
    for (const auto& gi : out) {
      writeModelFile(gi.model, (fs::path(out_dir) / gi.file).string());
      manifest["instances"].push_back(gi.file);
      oracle[gi.file] = gi.oracle;
    }
    std::ofstream(fs::path(out_dir) / "manifest.json")
        << manifest.dump(2) << "\n";
    std::ofstream(fs::path(out_dir) / "oracle.json")
        << oracle.dump(2) << "\n";
  }
  return out;
}

// ---------------------------------------------------------------------
// Config labels and bench sweeps.

RunConfig parseConfigLabel(const std::string& label) {
  RunConfig rc;
  rc.label = label;
  std::string core = label;
  if (core.rfind("C-", 0) == 0) {
    rc.options.convexify = true;
    core = core.substr(2);
  }
  if (core.size() >= 3 && core[core.size() - 3] == '(' &&
      core.back() == ')') {
    char s = core[core.size() - 2];
    if (s == 'r' || s == 'R')
      rc.options.subproblem_scale = SubproblemScale::Reduced;
    else if (s == 'c' || s == 'C')
      rc.options.subproblem_scale = SubproblemScale::Complete;
    else
      throw ParseError("unknown subproblem scale in '" + label + "'");
    core = core.substr(0, core.size() - 3);
  }
  std::string key;
  for (char c : core)
    if (std::isalnum((unsigned char)c)) key += (char)std::tolower(c);
  if (key == "oa")
    rc.options.algorithm = Algorithm::OA;
  else if (key == "lpnlp" || key == "lpnlpbb")
    rc.options.algorithm = Algorithm::LpNlpBB;
  else if (key == "goa")
    rc.options.algorithm = Algorithm::GOA;
  else if (key == "glpnlp" || key == "glpnlpbb")
    rc.options.algorithm = Algorithm::GLpNlpBB;
  else
    throw ParseError("unknown configuration '" + label + "'");
  return rc;
}

RunRecord runOne(const std::string& file, const RunConfig& config,
                 double time_limit_s) {
  RunRecord r;
  r.instance = std::filesystem::path(file).filename().string();
  r.config = config.label;
  try {
    Model m = readModelFile(file);
    SolverOptions o = config.options;
    o.time_limit_s = time_limit_s;
    SolveResult res = solve(m, o);
    r.status = statusName(res.status);
    r.objective = res.objective;
    r.lb = res.bounds.lb;
    r.ub = res.bounds.ub;
    r.iterations = res.nlp_solves;
    r.time_s = res.wall_time_s;
  } catch (const std::exception&) {
    r.status = "error";
  }
  return r;
}

std::vector<RunRecord> runBench(const std::vector<std::string>& files,
                                const std::vector<RunConfig>& configs,
                                double time_limit_s, bool parallel,
                                std::ostream* warnings) {
  if (warnings) {
    for (const auto& f : files) {
      try {
        Model m = readModelFile(f);
        bool has_cont = false;
        for (const auto& v : m.vars())
          if (!v.discrete()) has_cont = true;
        if (!m.hasDiscrete() || !has_cont)
          *warnings << "warning: " << f
                    << " lacks a discrete/continuous mix\n";
      } catch (const std::exception& e) {
        *warnings << "warning: " << f << ": " << e.what() << "\n";
      }
    }
  }
  struct Job {
    int fi, ci;
  };
  std::vector<Job> jobs;
  for (size_t fi = 0; fi < files.size(); ++fi)
    for (size_t ci = 0; ci < configs.size(); ++ci)
      jobs.push_back({(int)fi, (int)ci});
  std::vector<RunRecord> rows(jobs.size());
  int nj = (int)jobs.size();
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
  for (int j = 0; j < nj; ++j)
    rows[j] = runOne(files[jobs[j].fi], configs[jobs[j].ci], time_limit_s);
  std::sort(rows.begin(), rows.end(),
            [](const RunRecord& a, const RunRecord& b) {
              if (a.instance != b.instance) return a.instance < b.instance;
              return a.config < b.config;
            });
  (void)parallel;
  return rows;
}

namespace {

std::string num(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

double parseNum(const std::string& s) {
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  return std::stod(s);
}

}  // namespace

void writeRunCsv(std::ostream& os, const std::vector<RunRecord>& rows) {
  os << "instance,config,status,objective,lb,ub,iterations,time_s\n";
  for (const auto& r : rows)
    os << r.instance << "," << r.config << "," << r.status << ","
       << num(r.objective) << "," << num(r.lb) << "," << num(r.ub) << ","
       << r.iterations << "," << num(r.time_s) << "\n";
}

std::vector<RunRecord> readRunCsv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line))
    throw ParseError("empty bench CSV");
  if (line.rfind("instance,config,status,objective,lb,ub,iterations,time_s",
                 0) != 0)
    throw ParseError("bench CSV: unexpected header '" + line + "'");
  std::vector<RunRecord> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (f.size() != 8)
      throw ParseError("bench CSV: malformed row '" + line + "'");
    RunRecord r;
    r.instance = f[0];
    r.config = f[1];
    r.status = f[2];
    r.objective = parseNum(f[3]);
    r.lb = parseNum(f[4]);
    r.ub = parseNum(f[5]);
    r.iterations = std::stoi(f[6]);
    r.time_s = parseNum(f[7]);
    rows.push_back(std::move(r));
  }
  return rows;
}

ProfileTable computeProfile(const std::vector<RunRecord>& rows,
                            bool metric_time) {
  ProfileTable t;
  std::vector<std::string> instances;
  for (const auto& r : rows) {
    if (std::find(t.configs.begin(), t.configs.end(), r.config) ==
        t.configs.end())
      t.configs.push_back(r.config);
    if (std::find(instances.begin(), instances.end(), r.instance) ==
        instances.end())
      instances.push_back(r.instance);
  }
  auto metric = [&](const RunRecord& r) {
    double v = metric_time ? r.time_s : (double)r.iterations;
    return std::max(v, 1e-9);
  };
  // ratio[i][c], infinity when unsolved
  std::vector<std::vector<double>> ratio(
      instances.size(), std::vector<double>(t.configs.size(), kInf));
  for (size_t i = 0; i < instances.size(); ++i) {
    double best = kInf;
    for (const auto& r : rows)
      if (r.instance == instances[i] && r.status == "optimal")
        best = std::min(best, metric(r));
    if (!std::isfinite(best)) continue;
    for (const auto& r : rows) {
      if (r.instance != instances[i] || r.status != "optimal") continue;
      size_t c = std::find(t.configs.begin(), t.configs.end(), r.config) -
                 t.configs.begin();
      ratio[i][c] = metric(r) / best;
    }
  }
  std::set<double> grid{1.0};
  for (const auto& ri : ratio)
    for (double v : ri)
      if (std::isfinite(v)) grid.insert(v);
  for (double tau : grid) {
    t.ratios.push_back(tau);
    std::vector<double> frac(t.configs.size(), 0.0);
    for (size_t c = 0; c < t.configs.size(); ++c) {
      int cnt = 0;
      for (size_t i = 0; i < instances.size(); ++i)
        if (ratio[i][c] <= tau + 1e-12) ++cnt;
      frac[c] = instances.empty() ? 0.0 : (double)cnt / instances.size();
    }
    t.fractions.push_back(std::move(frac));
  }
  return t;
}

void writeProfileCsv(std::ostream& os, const ProfileTable& t) {
  os << "ratio";
  for (const auto& c : t.configs) os << "," << c;
  os << "\n";
  for (size_t r = 0; r < t.ratios.size(); ++r) {
    os << num(t.ratios[r]);
    for (double f : t.fractions[r]) os << "," << num(f);
    os << "\n";
  }
}

}  // namespace minlp::bench
