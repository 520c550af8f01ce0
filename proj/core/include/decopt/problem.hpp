#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "decopt/graph.hpp"

namespace decopt {

// Data owned by one node. Every callback takes the stacked neighborhood
// vector v = (x_j)_{j in N_i} with blocks in ascending node order; gradients
// and Jacobians are returned as one block per neighborhood member in the same
// order. A_blocks holds the node's slices of the networked equality
// constraint, aligned with the neighborhood order, each of shape m x d_j.
struct NodeProblem {
  int dim = 1;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  std::function<double(const Eigen::VectorXd&)> f;
  std::function<std::vector<Eigen::VectorXd>(const Eigen::VectorXd&)> grad_f;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> g;
  std::function<std::vector<Eigen::MatrixXd>(const Eigen::VectorXd&)> jac_g;

  std::vector<Eigen::MatrixXd> A_blocks;
  Eigen::VectorXd b;
};

// Problem over a connected graph: minimize sum_i f_i(x_{N_i}) subject to
// sum_i g_i(x_{N_i}) <= 0, sum_i (A_i x_{N_i} - b_i) = 0 and per-node boxes,
// where x_{N_i} collects the variables of the closed neighborhood of i.
struct CoupledProblem {
  Graph graph;
  std::vector<NodeProblem> nodes;
  int p = 0;
  int m = 0;

  // When set, f_i and g_i depend only on x_i; the simulator may then skip all
  // primal exchanges. Checked against finite differences at setup.
  bool no_coupling = false;

  // Optional strictly feasible point (stacked), used by dual norm bounds.
  Eigen::VectorXd slater_point;

  // Filled by finalize().
  std::vector<int> x_offset;
  int total_dim = 0;

  int n() const { return graph.n; }
  int neighborhood_dim(int i) const;
  // v = (x_j)_{j in N_i} from the stacked vector.
  Eigen::VectorXd gather(const Eigen::VectorXd& x, int i) const;
  // offset of x_j inside the neighborhood vector of node i; j must be in N_i.
  int local_offset(int i, int j) const;

  Eigen::VectorXd lower_stacked() const;
  Eigen::VectorXd upper_stacked() const;
  Eigen::VectorXd clamp_to_box(const Eigen::VectorXd& x) const;

  // sum_i g_i(x_{N_i}) and sum_i (A_i x_{N_i} - b_i) on the stacked vector.
  Eigen::VectorXd total_inequality(const Eigen::VectorXd& x) const;
  Eigen::VectorXd total_equality_residual(const Eigen::VectorXd& x) const;
  double total_objective(const Eigen::VectorXd& x) const;
};

// Validates shapes (box sizes, A block counts and shapes, b length) and
// computes the stacked offsets. Must be called once after assembling the
// struct and before any other use.
void finalize(CoupledProblem& prob);

struct DerivativeCheckReport {
  double max_grad_rel_err = 0.0;
  double max_jac_rel_err = 0.0;
  // Largest |f_i(x + h e) - f_i(x)| (and same for g_i) over perturbations of
  // coordinates owned by other nodes; only meaningful when no_coupling is set.
  double max_cross_dependence = 0.0;
  bool grad_ok(double tol = 1e-5) const { return max_grad_rel_err <= tol; }
  bool jac_ok(double tol = 1e-5) const { return max_jac_rel_err <= tol; }
};

// Central finite differences with h = 1e-6 * (1 + |coord|) at `points`
// sampled interior points. Throws NonFiniteValueError if a callback produces
// NaN or Inf.
DerivativeCheckReport check_derivatives(const CoupledProblem& prob, int points,
                                        std::uint64_t seed);

// Cheap cross-dependence probe for the no_coupling flag; throws ConfigError
// if a callback of node i reacts to a perturbation of x_j, j != i.
void verify_no_coupling(const CoupledProblem& prob, std::uint64_t seed);

struct LipschitzEstimates {
  double L_f = 0.0;       // per-node gradient Lipschitz constant of f_i
  double L_g = 0.0;       // per-node Jacobian Lipschitz constant of g_i
  double beta = 0.0;      // sup ||Jac g_i|| over the box
  double L_F = 0.0;       // L_f * max_i |N_i|
  double beta_tilde = 0.0;  // sqrt((1 + beta^2) * max_i |N_i|)
};

// Sampled estimates over the box: ratios ||D(v)-D(w)|| / ||v-w|| for the
// Lipschitz constants and pointwise norms for beta, times a safety factor.
LipschitzEstimates estimate_lipschitz(const CoupledProblem& prob, int samples,
                                      std::uint64_t seed);

}  // namespace decopt
