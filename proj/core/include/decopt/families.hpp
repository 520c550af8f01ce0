#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "decopt/graph.hpp"
#include "decopt/problem.hpp"

namespace decopt {

// Family 1: linear cost with a shared log-utility budget. Each node owns one
// scalar x_i in [0, 1], pays cost_i * x_i and contributes weight_i *
// log(1 + x_i) towards a global budget:
//   minimize sum_i cost_i x_i  s.t.  sum_i weight_i log(1 + x_i) >= budget.
// Objectives and constraints touch only the node's own variable, so the
// instance is flagged as uncoupled. A zero equality block (m = 1, A = 0,
// b = 0) is carried so the full protocol surface stays exercised.
struct LinearLogOptions {
  int n = 50;
  std::uint64_t seed = 1;
  double budget = -1.0;  // < 0: defaults to 0.1 * n
  double target_avg_degree = 4.0;
  Graph graph;                    // optional explicit topology
  Eigen::VectorXd cost, weight;   // optional explicit coefficients
};

struct LinearLogData {
  Graph graph;
  Eigen::VectorXd cost;
  Eigen::VectorXd weight;
  double budget = 0.0;
  std::uint64_t seed = 0;
  int attempts = 1;
};

// Draws cost_i, weight_i ~ U[0,1] and redraws (bounded number of attempts)
// until the instance is strictly feasible with margin; explicit coefficients
// that cannot meet the budget raise InfeasibleError.
LinearLogData gen_linear_log(const LinearLogOptions& opts);
std::shared_ptr<CoupledProblem> build_problem(const LinearLogData& data);

// Family 2: neighborhood-coupled convex quadratics. Node i owns x_i in R^d
// and evaluates f_i(v) = v^T P_i v + Q_i^T v on its neighborhood vector v,
// subject to one shared set of p quadratic inequality rows, m shared linear
// equality rows and per-coordinate boxes. Right-hand sides are chosen so a
// generated interior point is strictly feasible and satisfies the equality
// exactly.
struct CoupledQuadraticOptions {
  int n = 50;
  int d = 2;
  int m = 2;
  int p = 1;
  std::uint64_t seed = 1;
  double target_avg_degree = 4.0;
  Graph graph;  // optional explicit topology
};

struct QuadNodeData {
  Eigen::MatrixXd P;                       // dN x dN, PSD
  Eigen::VectorXd Q;                       // dN
  std::vector<Eigen::MatrixXd> ineq_quad;  // p matrices, dN x dN, PSD
  Eigen::MatrixXd ineq_lin;                // p x dN
  Eigen::VectorXd ineq_shift;              // p
  Eigen::MatrixXd eq;                      // m x dN
  Eigen::VectorXd eq_rhs;                  // m
  Eigen::VectorXd lower, upper;            // d
};

struct CoupledQuadraticData {
  Graph graph;
  int d = 0, m = 0, p = 0;
  std::uint64_t seed = 0;
  std::vector<QuadNodeData> nodes;
  Eigen::VectorXd slater;
};

CoupledQuadraticData gen_coupled_quadratic(const CoupledQuadraticOptions& opts);
std::shared_ptr<CoupledProblem> build_problem(const CoupledQuadraticData& data);

}  // namespace decopt
