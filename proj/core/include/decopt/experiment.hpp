#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "decopt/algorithm.hpp"
#include "decopt/netsim.hpp"
#include "decopt/oracle.hpp"
#include "decopt/trajectory.hpp"

namespace decopt {

struct ExperimentConfig {
  std::string family = "linear-log";  // "linear-log", "coupled-quadratic" or "file"
  std::string problem_file;           // used when family == "file"
  int n = 50;
  std::uint64_t seed = 1;
  int d = 2;
  int m = 2;
  int p = 1;
  double budget = -1.0;  // linear-log right-hand side; < 0 means 0.1 * n
  double target_avg_degree = 4.0;
  std::string graph_file;  // optional explicit topology (edge-list text)

  double gamma = -1.0;  // < 0: family default
  bool gamma_auto = false;
  double rho = 1.0;
  double shrink = 1.0;
  int max_iter = 1000;
  std::string engine = "decentralized";  // or "stacked"
  bool audit = false;
  bool skip_reference = false;
  std::string out_dir;  // empty: write nothing
};

struct ExperimentResult {
  std::string family;
  int n = 0;
  double gamma_used = 0.0;
  double rho_used = 0.0;
  std::string gamma_source;  // "cli", "default" or "auto"
  bool theoretical_guarantee = false;

  bool has_reference = false;
  ReferenceSolution reference;
  DualEstimate dual;
  RateConstants constants;
  BoundCheckReport bounds;

  std::vector<IterationRecord> records;
  AlgoState final_state;
  CommAudit audit;
  bool audit_written = false;

  std::string metrics_path, constants_path, manifest_path, audit_path, bounds_path;
};

// Builds (or loads) the instance, solves the reference problem, resolves the
// step size, runs the requested engine with the metrics recorder attached and
// writes metrics.csv, constants.json, bounds.csv, manifest.json and audit.csv
// into out_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Committed defaults used when no step size is given.
double default_gamma(const std::string& family);

}  // namespace decopt
