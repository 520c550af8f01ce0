#include "decopt/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "decopt/errors.hpp"
#include "decopt/families.hpp"
#include "decopt/netsim.hpp"
#include "decopt/problem_io.hpp"

namespace decopt {

double default_gamma(const std::string& family) {
  if (family == "linear-log") return 0.05;
  if (family == "coupled-quadratic") return 0.02;
  throw ConfigError("no default step size for family '" + family + "'");
}

namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw RuntimeError("could not open " + path.string() + " for writing");
  return f;
}

void write_bounds_csv(std::ostream& out, const std::vector<IterationRecord>& records,
                      const RateConstants& c) {
  out << "k,G_avg_max,bound_G,eq_norm,bound_eq,obj_gap_avg,bound_obj_lower,"
         "bound_obj_upper,total_ineq_max,bound_total_ineq\n";
  char buf[512];
  for (const auto& r : records) {
    if (r.k <= 0) continue;
    const double k = r.k;
    std::snprintf(buf, sizeof(buf),
                  "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.k,
                  r.G_avg_max, c.bound_G_coeff / k, r.lifted_eq_norm, c.D0 / k,
                  r.obj_gap_avg, -c.C0 / k, c.S0 / k, r.total_ineq_max_avg,
                  c.bound_total_ineq_coeff / k);
    out << buf;
  }
}

json constants_to_json(const ExperimentResult& res) {
  const RateConstants& c = res.constants;
  json j;
  j["f_star"] = c.f_star;
  j["lambda_norm"] = c.lambda_norm;
  j["lambda_sum"] = c.lambda_sum;
  j["u_stack_norm_w"] = c.u_stack_norm_w;
  j["u0_norm_w"] = c.u0_norm_w;
  j["C"] = c.C;
  j["D0"] = c.D0;
  j["C0"] = c.C0;
  j["S0"] = c.S0;
  j["bound_G_coeff"] = c.bound_G_coeff;
  j["bound_total_ineq_coeff"] = c.bound_total_ineq_coeff;
  j["gamma_tilde"] = c.gamma_tilde;
  j["gamma_used"] = c.gamma_used;
  j["rho_used"] = c.rho_used;
  j["gamma_satisfies_bound"] = c.gamma_satisfies_bound;
  j["negative_C"] = c.negative_C;
  j["BtB_norm"] = c.BtB_norm;
  j["lipschitz"] = {{"L_f", c.lips.L_f},
                    {"L_g", c.lips.L_g},
                    {"beta", c.lips.beta},
                    {"L_F", c.lips.L_F},
                    {"beta_tilde", c.lips.beta_tilde}};
  j["oracle"] = {{"method", res.reference.method},
                 {"f_star", res.reference.f_star},
                 {"ineq_residual", res.reference.ineq_residual},
                 {"eq_residual", res.reference.eq_residual},
                 {"evaluations", res.reference.evaluations},
                 {"budget_exhausted", res.reference.budget_exhausted}};
  json mu = json::array(), nu = json::array();
  for (Eigen::Index i = 0; i < res.dual.mu.size(); ++i) mu.push_back(res.dual.mu(i));
  for (Eigen::Index i = 0; i < res.dual.nu.size(); ++i) nu.push_back(res.dual.nu(i));
  j["dual"] = {{"mu", std::move(mu)},
               {"nu", std::move(nu)},
               {"stationarity_residual", res.dual.stationarity_residual},
               {"rank_deficient", res.dual.rank_deficient},
               {"interior_coords", res.dual.interior_coords},
               {"lambda_norm_slater_bound",
                std::isfinite(res.dual.lambda_norm_slater_bound)
                    ? json(res.dual.lambda_norm_slater_bound)
                    : json()}};
  return j;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.max_iter < 0) throw ConfigError("max_iter must be nonnegative");
  if (!(cfg.rho > 0)) throw ConfigError("rho must be positive");

  Graph graph_override;
  if (!cfg.graph_file.empty()) {
    std::ifstream gf(cfg.graph_file);
    if (!gf) throw ConfigError("could not open graph file " + cfg.graph_file);
    graph_override = load_graph(gf);
  }

  ExperimentResult res;
  std::shared_ptr<CoupledProblem> prob;
  double linlog_budget = std::nan("");
  int gen_attempts = 0;

  std::string family = cfg.family;
  if (family == "linear-log") {
    LinearLogOptions o;
    o.n = cfg.n;
    o.seed = cfg.seed;
    o.budget = cfg.budget;
    o.target_avg_degree = cfg.target_avg_degree;
    o.graph = graph_override;
    LinearLogData data = gen_linear_log(o);
    linlog_budget = data.budget;
    gen_attempts = data.attempts;
    prob = build_problem(data);
  } else if (family == "coupled-quadratic") {
    CoupledQuadraticOptions o;
    o.n = cfg.n;
    o.d = cfg.d;
    o.m = cfg.m;
    o.p = cfg.p;
    o.seed = cfg.seed;
    o.target_avg_degree = cfg.target_avg_degree;
    o.graph = graph_override;
    prob = build_problem(gen_coupled_quadratic(o));
  } else if (family == "file") {
    if (cfg.problem_file.empty()) throw ConfigError("family 'file' needs a problem file");
    std::ifstream pf(cfg.problem_file);
    if (!pf) throw ConfigError("could not open problem file " + cfg.problem_file);
    LoadedProblem loaded = load_problem_json(pf);
    family = loaded.family;
    prob = loaded.problem;
    if (loaded.family == "linear-log") {
      linlog_budget = loaded.linear_log.budget;
      gen_attempts = loaded.linear_log.attempts;
    }
  } else {
    throw ConfigError("unknown family '" + family + "'");
  }

  res.family = family;
  res.n = prob->n();

  auto lp = lift(prob);
  AlgoParams params;
  params.rho = cfg.rho;
  params.max_iter = cfg.max_iter;
  params.weights = build_weight_matrices(prob->graph, cfg.shrink);
  WeightValidationReport wrep = validate_weights(params.weights, prob->graph);

  LipschitzEstimates lips;
  if (!cfg.skip_reference) {
    res.reference = solve_reference(*prob);
    res.dual = estimate_dual(*prob, res.reference);
    lips = estimate_lipschitz(*prob, 64, cfg.seed ^ 0xa5a5a5a5ULL);
    res.has_reference = true;
  }

  if (cfg.gamma > 0) {
    params.gamma = cfg.gamma;
    res.gamma_source = "cli";
  } else if (cfg.gamma_auto) {
    if (!res.has_reference)
      throw ConfigError("automatic step size needs the reference pipeline");
    AlgoParams provisional = params;
    provisional.gamma = 1.0;
    RateConstants c0 = compute_constants(*lp, res.reference, res.dual, lips, provisional);
    if (!(c0.gamma_tilde > 0) || !std::isfinite(c0.gamma_tilde))
      throw RuntimeError("certified step size came out nonpositive");
    params.gamma = c0.gamma_tilde;
    res.gamma_source = "auto";
  } else {
    params.gamma = default_gamma(family);
    res.gamma_source = "default";
  }
  res.gamma_used = params.gamma;
  res.rho_used = params.rho;

  if (res.has_reference)
    res.constants = compute_constants(*lp, res.reference, res.dual, lips, params);

  RunRecorder recorder(lp, params);
  if (res.has_reference) recorder.set_reference(res.reference.x_star, res.reference.f_star);

  if (cfg.engine == "stacked") {
    res.final_state = run_stacked(*lp, params, {}, {}, recorder.hooks());
  } else if (cfg.engine == "decentralized") {
    NetworkSim sim(lp, params, cfg.audit);
    sim.initialize();
    sim.run(cfg.max_iter, recorder.hooks());
    res.final_state = sim.snapshot();
    res.audit = sim.audit();
  } else {
    throw ConfigError("unknown engine '" + cfg.engine + "'");
  }
  res.records = recorder.records();

  if (res.has_reference) {
    BoundCheckOptions bopts;
    bopts.slope_k_max = std::min(bopts.slope_k_max, cfg.max_iter);
    res.bounds = check_rate_bounds(res.records, res.constants, bopts);
    res.theoretical_guarantee = res.constants.gamma_satisfies_bound;
  }

  if (!cfg.out_dir.empty()) {
    std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);

    {
      auto f = open_out(dir / "metrics.csv");
      recorder.write_metrics_csv(f);
      res.metrics_path = (dir / "metrics.csv").string();
    }
    if (res.has_reference) {
      auto f = open_out(dir / "constants.json");
      f << constants_to_json(res).dump(2) << "\n";
      res.constants_path = (dir / "constants.json").string();

      auto b = open_out(dir / "bounds.csv");
      write_bounds_csv(b, res.records, res.constants);
      res.bounds_path = (dir / "bounds.csv").string();
    }
    if (cfg.audit && cfg.engine == "decentralized") {
      auto f = open_out(dir / "audit.csv");
      res.audit.write_csv(f);
      res.audit_path = (dir / "audit.csv").string();
      res.audit_written = true;
    }

    json manifest;
    manifest["schema"] = 1;
    manifest["family"] = family;
    manifest["n"] = res.n;
    manifest["seed"] = cfg.seed;
    manifest["engine"] = cfg.engine;
    manifest["gamma"] = res.gamma_used;
    manifest["gamma_source"] = res.gamma_source;
    manifest["rho"] = res.rho_used;
    manifest["shrink"] = cfg.shrink;
    manifest["max_iter"] = cfg.max_iter;
    manifest["p"] = prob->p;
    manifest["m"] = prob->m;
    manifest["total_dim"] = prob->total_dim;
    manifest["edges"] = prob->graph.edges.size();
    manifest["weights_pass"] = wrep.pass();
    manifest["theoretical_guarantee"] =
        res.has_reference ? json(res.theoretical_guarantee) : json();
    if (!std::isnan(linlog_budget)) {
      manifest["budget"] = linlog_budget;
      manifest["gen_attempts"] = gen_attempts;
    }
    if (res.has_reference) {
      manifest["oracle_method"] = res.reference.method;
      manifest["f_star"] = res.reference.f_star;
      manifest["gamma_tilde"] = res.constants.gamma_tilde;
    }
    json outputs = json::array({"metrics.csv"});
    if (res.has_reference) {
      outputs.push_back("constants.json");
      outputs.push_back("bounds.csv");
    }
    if (res.audit_written) outputs.push_back("audit.csv");
    manifest["outputs"] = std::move(outputs);

    auto f = open_out(dir / "manifest.json");
    f << manifest.dump(2) << "\n";
    res.manifest_path = (dir / "manifest.json").string();
  }

  return res;
}

}  // namespace decopt
