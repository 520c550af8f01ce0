#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "decopt/errors.hpp"
#include "decopt/experiment.hpp"
#include "decopt/families.hpp"
#include "decopt/graph.hpp"
#include "decopt/mixing.hpp"
#include "decopt/problem_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct RunArgs {
  decopt::ExperimentConfig cfg;
  std::string gamma_arg;
};

int cmd_run(RunArgs& args) {
  if (!args.gamma_arg.empty()) {
    if (args.gamma_arg == "auto") {
      args.cfg.gamma_auto = true;
    } else {
      try {
        args.cfg.gamma = std::stod(args.gamma_arg);
      } catch (const std::exception&) {
        throw decopt::ConfigError("--gamma expects a number or 'auto'");
      }
      if (!(args.cfg.gamma > 0)) throw decopt::ConfigError("--gamma must be positive");
    }
  }

  decopt::ExperimentResult res = decopt::run_experiment(args.cfg);

  std::printf("family=%s n=%d engine=%s gamma=%.6g (%s) rho=%.6g iters=%zu\n",
              res.family.c_str(), res.n, args.cfg.engine.c_str(), res.gamma_used,
              res.gamma_source.c_str(), res.rho_used, res.records.size());
  if (res.has_reference) {
    std::printf("reference: method=%s f_star=%.12g ineq_res=%.3g eq_res=%.3g\n",
                res.reference.method.c_str(), res.reference.f_star,
                res.reference.ineq_residual, res.reference.eq_residual);
    std::printf("guarantee: gamma_tilde=%.6g covered=%s\n", res.constants.gamma_tilde,
                res.theoretical_guarantee ? "yes" : "no");
    if (!res.records.empty()) {
      const auto& last = res.records.back();
      std::printf("final: k=%d |obj_gap_avg|=%.6g ineq_viol_avg=%.6g eq_viol_avg=%.6g\n",
                  last.k, std::abs(last.obj_gap_avg), last.ineq_viol_avg,
                  last.eq_viol_avg);
    }
  }
  if (!res.metrics_path.empty()) std::printf("wrote %s\n", res.metrics_path.c_str());
  if (!res.constants_path.empty()) std::printf("wrote %s\n", res.constants_path.c_str());
  if (!res.bounds_path.empty()) std::printf("wrote %s\n", res.bounds_path.c_str());
  if (!res.audit_path.empty()) std::printf("wrote %s\n", res.audit_path.c_str());
  if (!res.manifest_path.empty()) std::printf("wrote %s\n", res.manifest_path.c_str());
  return kExitOk;
}

struct GenArgs {
  std::string family = "linear-log";
  int n = 50;
  std::uint64_t seed = 1;
  int d = 2, m = 2, p = 1;
  double budget = -1.0;
  double avg_degree = 4.0;
  std::string graph_file;
  std::string out = "-";
};

int cmd_gen(const GenArgs& args) {
  decopt::Graph graph;
  if (!args.graph_file.empty()) {
    std::ifstream gf(args.graph_file);
    if (!gf) throw decopt::ConfigError("could not open graph file " + args.graph_file);
    graph = decopt::load_graph(gf);
  }

  std::ostringstream body;
  if (args.family == "linear-log") {
    decopt::LinearLogOptions o;
    o.n = args.n;
    o.seed = args.seed;
    o.budget = args.budget;
    o.target_avg_degree = args.avg_degree;
    o.graph = graph;
    decopt::save_problem_json(decopt::gen_linear_log(o), body);
  } else if (args.family == "coupled-quadratic") {
    decopt::CoupledQuadraticOptions o;
    o.n = args.n;
    o.d = args.d;
    o.m = args.m;
    o.p = args.p;
    o.seed = args.seed;
    o.target_avg_degree = args.avg_degree;
    o.graph = graph;
    decopt::save_problem_json(decopt::gen_coupled_quadratic(o), body);
  } else {
    throw decopt::ConfigError("unknown family '" + args.family + "'");
  }

  if (args.out == "-") {
    std::cout << body.str();
  } else {
    std::ofstream f(args.out);
    if (!f) throw decopt::RuntimeError("could not open " + args.out + " for writing");
    f << body.str();
    std::printf("wrote %s\n", args.out.c_str());
  }
  return kExitOk;
}

struct ValidateArgs {
  std::string graph_file;
  double shrink = 1.0;
};

int cmd_validate_weights(const ValidateArgs& args) {
  std::ifstream gf(args.graph_file);
  if (!gf) throw decopt::ConfigError("could not open graph file " + args.graph_file);
  decopt::Graph g = decopt::load_graph(gf);
  decopt::WeightPair wp = decopt::build_weight_matrices(g, args.shrink);
  decopt::WeightValidationReport rep = decopt::validate_weights(wp, g);
  std::printf("n=%d edges=%zu shrink=%.6g\n", g.n, g.edges.size(), args.shrink);
  std::printf("%s\n", rep.summary().c_str());
  std::printf("verdict: %s\n", rep.pass() ? "PASS" : "FAIL");
  return rep.pass() ? kExitOk : kExitCheckFailed;
}

struct CheckArgs {
  std::string bounds_file;
  std::string constants_file;
  double rel_slack = 1e-9;
  double abs_slack = 1e-12;
};

// Re-reads the envelope table written by `run` and verifies every row:
// measured value <= bound (up to slack), objective gap inside its corridor.
int cmd_check_bounds(const CheckArgs& args) {
  std::ifstream bf(args.bounds_file);
  if (!bf) throw decopt::ConfigError("could not open " + args.bounds_file);

  std::string header;
  std::getline(bf, header);
  const std::string expected =
      "k,G_avg_max,bound_G,eq_norm,bound_eq,obj_gap_avg,bound_obj_lower,"
      "bound_obj_upper,total_ineq_max,bound_total_ineq";
  if (header != expected)
    throw decopt::ConfigError("unexpected header in " + args.bounds_file);

  long rows = 0, violations = 0;
  int first_bad_k = -1;
  std::string line;
  auto slack = [&](double b) { return std::abs(b) * args.rel_slack + args.abs_slack; };
  while (std::getline(bf, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    double v[10];
    char comma;
    for (int c = 0; c < 10; ++c) {
      if (!(ls >> v[c])) throw decopt::ConfigError("bad row in " + args.bounds_file);
      if (c + 1 < 10) ls >> comma;
    }
    ++rows;
    bool bad = v[1] > v[2] + slack(v[2]) || v[3] > v[4] + slack(v[4]) ||
               v[5] < v[6] - slack(v[6]) || v[5] > v[7] + slack(v[7]) ||
               v[8] > v[9] + slack(v[9]);
    if (bad) {
      ++violations;
      if (first_bad_k < 0) first_bad_k = static_cast<int>(v[0]);
    }
  }

  bool guarantee = true;
  if (!args.constants_file.empty()) {
    std::ifstream cf(args.constants_file);
    if (!cf) throw decopt::ConfigError("could not open " + args.constants_file);
    nlohmann::json j;
    try {
      cf >> j;
    } catch (const nlohmann::json::exception& e) {
      throw decopt::ConfigError(std::string("could not parse constants: ") + e.what());
    }
    guarantee = j.value("gamma_satisfies_bound", true);
    std::printf("gamma_tilde=%.6g gamma_used=%.6g certified=%s\n",
                j.value("gamma_tilde", 0.0), j.value("gamma_used", 0.0),
                guarantee ? "yes" : "no");
  }

  std::printf("rows=%ld violations=%ld", rows, violations);
  if (first_bad_k >= 0) std::printf(" first_violation_k=%d", first_bad_k);
  std::printf("\n");
  if (violations == 0) {
    std::printf("verdict: PASS\n");
    return kExitOk;
  }
  if (!guarantee) {
    std::printf("verdict: VIOLATIONS (advisory: step size not certified)\n");
    return kExitOk;
  }
  std::printf("verdict: FAIL\n");
  return kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decentralized projected primal-dual solver workbench"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run one experiment and write its outputs");
  run->add_option("--family", run_args.cfg.family,
                  "linear-log, coupled-quadratic or file");
  run->add_option("--problem", run_args.cfg.problem_file, "problem JSON (family=file)");
  run->add_option("--n", run_args.cfg.n, "node count");
  run->add_option("--seed", run_args.cfg.seed, "generator seed");
  run->add_option("--d", run_args.cfg.d, "per-node dimension (quadratic family)");
  run->add_option("--m", run_args.cfg.m, "equality rows (quadratic family)");
  run->add_option("--p", run_args.cfg.p, "inequality rows (quadratic family)");
  run->add_option("--budget", run_args.cfg.budget, "utility budget (linear-log family)");
  run->add_option("--avg-degree", run_args.cfg.target_avg_degree, "target average degree");
  run->add_option("--graph", run_args.cfg.graph_file, "edge-list file overriding topology");
  run->add_option("--gamma", run_args.gamma_arg, "step size, or 'auto' to certify one");
  run->add_option("--rho", run_args.cfg.rho, "dual step parameter");
  run->add_option("--shrink", run_args.cfg.shrink, "scaling of the disagreement matrix");
  run->add_option("--max-iter", run_args.cfg.max_iter, "iteration count");
  run->add_option("--engine", run_args.cfg.engine, "decentralized or stacked");
  run->add_flag("--audit", run_args.cfg.audit, "write per-round message counts");
  run->add_flag("--skip-reference", run_args.cfg.skip_reference,
                "skip the baseline solve and bound constants");
  run->add_option("--out", run_args.cfg.out_dir, "output directory");

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "Generate a problem instance as JSON");
  gen->add_option("--family", gen_args.family, "linear-log or coupled-quadratic");
  gen->add_option("--n", gen_args.n, "node count");
  gen->add_option("--seed", gen_args.seed, "generator seed");
  gen->add_option("--d", gen_args.d, "per-node dimension (quadratic family)");
  gen->add_option("--m", gen_args.m, "equality rows (quadratic family)");
  gen->add_option("--p", gen_args.p, "inequality rows (quadratic family)");
  gen->add_option("--budget", gen_args.budget, "utility budget (linear-log family)");
  gen->add_option("--avg-degree", gen_args.avg_degree, "target average degree");
  gen->add_option("--graph", gen_args.graph_file, "edge-list file overriding topology");
  gen->add_option("--out", gen_args.out, "output file, '-' for stdout");

  ValidateArgs val_args;
  auto* val = app.add_subcommand("validate-weights",
                                 "Build and check the gossip matrices of a graph");
  val->add_option("--graph", val_args.graph_file, "edge-list file")->required();
  val->add_option("--shrink", val_args.shrink, "scaling of the disagreement matrix");

  CheckArgs chk_args;
  auto* chk = app.add_subcommand("check-bounds",
                                 "Re-verify a written bounds.csv against its envelopes");
  chk->add_option("--bounds", chk_args.bounds_file, "bounds.csv from a run")->required();
  chk->add_option("--constants", chk_args.constants_file, "constants.json from the run");
  chk->add_option("--rel-slack", chk_args.rel_slack, "relative tolerance");
  chk->add_option("--abs-slack", chk_args.abs_slack, "absolute tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_args);
    if (gen->parsed()) return cmd_gen(gen_args);
    if (val->parsed()) return cmd_validate_weights(val_args);
    if (chk->parsed()) return cmd_check_bounds(chk_args);
  } catch (const decopt::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const decopt::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}
