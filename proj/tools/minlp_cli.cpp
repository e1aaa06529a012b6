#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "minlp/bench.hpp"
#include "minlp/model_json.hpp"

namespace {

using namespace minlp;

int exitCode(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return 0;
    case SolveStatus::Infeasible: return 2;
    default: return 3;
  }
}

nlohmann::json resultJson(const SolveResult& r) {
  nlohmann::json j;
  j["status"] = statusName(r.status);
  j["objective"] = r.objective;
  j["lb"] = r.bounds.lb;
  j["ub"] = r.bounds.ub;
  j["iterations"] = r.nlp_solves;
  j["master_nodes"] = r.master_nodes;
  j["time_s"] = r.wall_time_s;
  j["heuristic_fallback"] = r.heuristic_fallback;
  if (r.has_incumbent) j["point"] = r.incumbent;
  return j;
}

int cmdSolve(const std::string& file, const std::string& alg, bool convexify,
             const std::string& scale, double eps_abs, double eps_rel,
             double time_limit, const std::string& norm,
             const std::string& trace_path, bool as_json) {
  Model m;
  try {
    m = readModelFile(file);
  } catch (const std::exception& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  }
  SolverOptions o;
  if (alg == "oa")
    o.algorithm = Algorithm::OA;
  else if (alg == "lpnlp")
    o.algorithm = Algorithm::LpNlpBB;
  else if (alg == "goa")
    o.algorithm = Algorithm::GOA;
  else
    o.algorithm = Algorithm::GLpNlpBB;
  o.convexify = convexify;
  o.subproblem_scale =
      scale == "c" ? SubproblemScale::Complete : SubproblemScale::Reduced;
  o.eps_abs = eps_abs;
  o.eps_rel = eps_rel;
  o.time_limit_s = time_limit;
  o.feasibility_norm = norm == "linf" ? Norm::Linf : Norm::L1;
  std::ofstream trace;
  if (!trace_path.empty()) {
    trace.open(trace_path);
    trace << "iter,lb,ub,gap,y_hash,subproblem_status,cuts_total,time_s\n";
    o.trace = &trace;
  }
  SolveResult r;
  try {
    r = solve(m, o);
  } catch (const std::exception& e) {
    std::cerr << "solve failed: " << e.what() << "\n";
    return 3;
  }
  if (as_json) {
    std::cout << resultJson(r).dump(2) << "\n";
  } else {
    std::cout << statusName(r.status);
    if (r.has_incumbent) std::cout << " " << r.objective;
    std::cout << "\n  bounds: [" << r.bounds.lb << ", " << r.bounds.ub
              << "]\n  subproblem solves: " << r.nlp_solves
              << "\n  time: " << r.wall_time_s << " s\n";
    if (r.status != SolveStatus::Optimal && std::isfinite(r.bounds.gap()))
      std::cout << "  gap: " << r.bounds.gap() << "\n";
  }
  return exitCode(r.status);
}

int cmdBench(const std::string& manifest, const std::string& configs,
             const std::string& out, double time_limit, bool serial) {
  std::vector<std::string> files;
  try {
    std::ifstream in(manifest);
    if (!in) throw ParseError("cannot open " + manifest);
    nlohmann::json j = nlohmann::json::parse(in);
    auto dir = std::filesystem::path(manifest).parent_path();
    for (const auto& f : j.at("instances"))
      files.push_back((dir / f.get<std::string>()).string());
  } catch (const std::exception& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  }
  std::vector<bench::RunConfig> cfgs;
  try {
    std::stringstream ss(configs);
    std::string label;
    while (std::getline(ss, label, ','))
      if (!label.empty()) cfgs.push_back(bench::parseConfigLabel(label));
    if (cfgs.empty()) throw ParseError("no configurations given");
  } catch (const std::exception& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  }
  auto rows = bench::runBench(files, cfgs, time_limit, !serial, &std::cerr);
  std::ofstream os(out);
  bench::writeRunCsv(os, rows);
  std::cout << rows.size() << " rows -> " << out << "\n";
  return 0;
}

int cmdProfile(const std::string& csv, const std::string& metric,
               const std::string& out) {
  try {
    std::ifstream in(csv);
    if (!in) throw ParseError("cannot open " + csv);
    auto rows = bench::readRunCsv(in);
    auto table = bench::computeProfile(rows, metric == "time");
    std::ofstream os(out);
    bench::writeProfileCsv(os, table);
    std::cout << table.ratios.size() << " ratio points -> " << out << "\n";
  } catch (const std::exception& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int cmdGenerate(const std::string& kind, int n, unsigned seed,
                const std::string& out) {
  auto made = bench::generateInstances(kind == "nonconvex", n, seed, out);
  std::cout << made.size() << " instances -> " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"outer-approximation MINLP solver"};
  app.require_subcommand(1);

  std::string file, alg = "oa", scale = "r", norm = "l1", trace_path;
  bool convexify = false, as_json = false;
  double eps_abs = 1e-5, eps_rel = 1e-3, time_limit = 900.0;
  auto* s = app.add_subcommand("solve", "solve one model file");
  s->add_option("file", file)->required();
  s->add_option("--alg", alg)->check(CLI::IsMember({"oa", "lpnlp", "goa", "glpnlp"}));
  s->add_flag("--convexify", convexify);
  s->add_option("--scale", scale)->check(CLI::IsMember({"r", "c"}));
  s->add_option("--eps-abs", eps_abs);
  s->add_option("--eps-rel", eps_rel);
  s->add_option("--time-limit", time_limit);
  s->add_option("--norm", norm)->check(CLI::IsMember({"l1", "linf"}));
  s->add_option("--trace", trace_path);
  s->add_flag("--json", as_json);

  std::string manifest, configs, out_csv;
  double bench_limit = 60.0;
  bool serial = false;
  auto* b = app.add_subcommand("bench", "run a configuration matrix");
  b->add_option("manifest", manifest)->required();
  b->add_option("--configs", configs)->required();
  b->add_option("--out", out_csv)->required();
  b->add_option("--time-limit", bench_limit);
  b->add_flag("--serial", serial);

  std::string prof_csv, metric = "time", prof_out;
  auto* p = app.add_subcommand("profile", "performance profile from bench CSV");
  p->add_option("csv", prof_csv)->required();
  p->add_option("--metric", metric)->check(CLI::IsMember({"time", "iterations"}));
  p->add_option("--out", prof_out)->required();

  std::string kind, gen_out;
  int gen_n = 1;
  unsigned gen_seed = 1;
  auto* g = app.add_subcommand("generate", "generate random instances");
  g->add_option("kind", kind)->required()->check(CLI::IsMember({"convex", "nonconvex"}));
  g->add_option("--n", gen_n)->required();
  g->add_option("--seed", gen_seed)->required();
  g->add_option("--out", gen_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (s->parsed())
    return cmdSolve(file, alg, convexify, scale, eps_abs, eps_rel,
                    time_limit, norm, trace_path, as_json);
  if (b->parsed())
    return cmdBench(manifest, configs, out_csv, bench_limit, serial);
  if (p->parsed()) return cmdProfile(prof_csv, metric, prof_out);
  return cmdGenerate(kind, gen_n, gen_seed, gen_out);
}
