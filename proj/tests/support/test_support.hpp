#pragma once

#include <cmath>
#include <memory>

#include "decopt/families.hpp"
#include "decopt/problem.hpp"

namespace testsup {

// Two nodes on one edge, scalar variables, one inequality and one equality
// row. Aggregated coupling columns come out as Abar_0 = [2], Abar_1 = [1]
// (so B_0 = diag(2, 1), c_0 = (3, 0)).
inline std::shared_ptr<decopt::CoupledProblem> two_node_coupled() {
  auto prob = std::make_shared<decopt::CoupledProblem>();
  prob->graph = decopt::build_graph(2, {{0, 1}});
  prob->p = 1;
  prob->m = 1;
  prob->nodes.resize(2);

  auto& n0 = prob->nodes[0];
  n0.dim = 1;
  n0.lower = Eigen::VectorXd::Constant(1, -2.0);
  n0.upper = Eigen::VectorXd::Constant(1, 2.0);
  n0.f = [](const Eigen::VectorXd& v) {
    return (v(0) - 1.0) * (v(0) - 1.0) + 0.1 * v(0) * v(1);
  };
  n0.grad_f = [](const Eigen::VectorXd& v) {
    std::vector<Eigen::VectorXd> out(2);
    out[0] = Eigen::VectorXd::Constant(1, 2.0 * (v(0) - 1.0) + 0.1 * v(1));
    out[1] = Eigen::VectorXd::Constant(1, 0.1 * v(0));
    return out;
  };
  n0.g = [](const Eigen::VectorXd& v) {
    return Eigen::VectorXd::Constant(1, v(0) * v(0) + 0.2 * v(1) - 0.5);
  };
  n0.jac_g = [](const Eigen::VectorXd& v) {
    std::vector<Eigen::MatrixXd> out(2);
    out[0] = Eigen::MatrixXd::Constant(1, 1, 2.0 * v(0));
    out[1] = Eigen::MatrixXd::Constant(1, 1, 0.2);
    return out;
  };
  n0.A_blocks = {Eigen::MatrixXd::Constant(1, 1, 1.0),
                 Eigen::MatrixXd::Constant(1, 1, 0.5)};
  n0.b = Eigen::VectorXd::Constant(1, 3.0);

  auto& n1 = prob->nodes[1];
  n1.dim = 1;
  n1.lower = Eigen::VectorXd::Constant(1, -2.0);
  n1.upper = Eigen::VectorXd::Constant(1, 2.0);
  n1.f = [](const Eigen::VectorXd& v) {
    return 0.5 * v(1) * v(1) + std::sin(0.3 * v(0));
  };
  n1.grad_f = [](const Eigen::VectorXd& v) {
    std::vector<Eigen::VectorXd> out(2);
    out[0] = Eigen::VectorXd::Constant(1, 0.3 * std::cos(0.3 * v(0)));
    out[1] = Eigen::VectorXd::Constant(1, v(1));
    return out;
  };
  n1.g = [](const Eigen::VectorXd& v) {
    return Eigen::VectorXd::Constant(1, 0.4 * v(1) - 0.1 * v(0));
  };
  n1.jac_g = [](const Eigen::VectorXd&) {
    std::vector<Eigen::MatrixXd> out(2);
    out[0] = Eigen::MatrixXd::Constant(1, 1, -0.1);
    out[1] = Eigen::MatrixXd::Constant(1, 1, 0.4);
    return out;
  };
  n1.A_blocks = {Eigen::MatrixXd::Constant(1, 1, 1.0),
                 Eigen::MatrixXd::Constant(1, 1, 0.5)};
  n1.b = Eigen::VectorXd::Constant(1, 1.0);

  decopt::finalize(*prob);
  return prob;
}

// Single node, cost * x subject to weight * log(1 + x) >= budget on [0, 1].
// Closed form: x* = exp(budget / weight) - 1, active constraint, multiplier
// cost * (1 + x*) / weight.
struct SingleNodeLogInstance {
  std::shared_ptr<decopt::CoupledProblem> problem;
  double x_star;
  double f_star;
  double mu_star;
};

inline SingleNodeLogInstance single_node_linear_log(double cost = 1.0, double weight = 1.0,
                                                    double budget = std::log(1.5)) {
  decopt::LinearLogOptions o;
  o.n = 1;
  o.seed = 3;
  o.budget = budget;
  o.cost = Eigen::VectorXd::Constant(1, cost);
  o.weight = Eigen::VectorXd::Constant(1, weight);
  o.graph = decopt::build_graph(1, {});
  SingleNodeLogInstance inst;
  inst.problem = decopt::build_problem(decopt::gen_linear_log(o));
  inst.x_star = std::exp(budget / weight) - 1.0;
  inst.f_star = cost * inst.x_star;
  inst.mu_star = cost * (1.0 + inst.x_star) / weight;
  return inst;
}

// All-zero objective and constraints on a path; the origin is a fixed point.
inline std::shared_ptr<decopt::CoupledProblem> zero_problem(int n) {
  auto prob = std::make_shared<decopt::CoupledProblem>();
  prob->graph = decopt::path_graph(n);
  prob->p = 1;
  prob->m = 1;
  prob->nodes.resize(n);
  for (int i = 0; i < n; ++i) {
    auto& nd = prob->nodes[i];
    const int blocks = static_cast<int>(prob->graph.neighbors(i).size());
    nd.dim = 1;
    nd.lower = Eigen::VectorXd::Constant(1, -1.0);
    nd.upper = Eigen::VectorXd::Constant(1, 1.0);
    nd.f = [](const Eigen::VectorXd&) { return 0.0; };
    nd.grad_f = [blocks](const Eigen::VectorXd&) {
      return std::vector<Eigen::VectorXd>(blocks, Eigen::VectorXd::Zero(1));
    };
    nd.g = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(1); };
    nd.jac_g = [blocks](const Eigen::VectorXd&) {
      return std::vector<Eigen::MatrixXd>(blocks, Eigen::MatrixXd::Zero(1, 1));
    };
    for (int a = 0; a < blocks; ++a) nd.A_blocks.push_back(Eigen::MatrixXd::Zero(1, 1));
    nd.b = Eigen::VectorXd::Zero(1);
  }
  decopt::finalize(*prob);
  return prob;
}

inline std::shared_ptr<decopt::CoupledProblem> small_quadratic(int n = 5, int d = 2,
                                                               int m = 2, int p = 2,
                                                               std::uint64_t seed = 21) {
  decopt::CoupledQuadraticOptions o;
  o.n = n;
  o.d = d;
  o.m = m;
  o.p = p;
  o.seed = seed;
  return decopt::build_problem(decopt::gen_coupled_quadratic(o));
}

}  // namespace testsup
