#pragma once

#include <Eigen/Dense>
#include <functional>

#include "decopt/lifted.hpp"
#include "decopt/mixing.hpp"

namespace decopt {

struct AlgoParams {
  double gamma = 0.0;
  double rho = 1.0;
  WeightPair weights;
  int max_iter = 1000;
};

// Iterate state. y is the lifted primal, q the per-node inequality queue,
// u and z the gossip dual pair. ybar_sum accumulates y^1 + ... + y^k so the
// running average is available at any time.
struct AlgoState {
  int k = 0;
  Eigen::VectorXd y;
  Eigen::VectorXd q;
  Eigen::VectorXd u;
  Eigen::VectorXd z;
  Eigen::VectorXd u0;
  Eigen::VectorXd ybar_sum;

  Eigen::VectorXd average_y() const;
};

// y0 empty: project the origin onto the box. u0 empty: zero. Always applies
// the projection to y0, sets q = max(-G(y), 0) and z = rho * H u.
AlgoState init_state(const LiftedProblem& lp, const AlgoParams& params,
                     const Eigen::VectorXd& y0 = {}, const Eigen::VectorXd& u0 = {});

// Gradient of the local model
//   R(y) = f(y) + <q + G(y^k), G(y)> + <W u - z/rho, B y - c>
//          + (1/(2 rho)) ||B y - c||^2
// at y = y^k.
Eigen::VectorXd compute_d_stacked(const LiftedProblem& lp, const AlgoState& s,
                                  const AlgoParams& params);

// Model value R(y) above, evaluated at an arbitrary y relative to state s.
double eval_model(const LiftedProblem& lp, const AlgoState& s, const AlgoParams& params,
                  const Eigen::VectorXd& y);

// One full iteration: projected primal step, queue update
// q <- max(-G(y+), q + G(y+)), then u <- W u + (B y+ - c - z)/rho and
// z <- z + rho H u, in that order.
void step_stacked(const LiftedProblem& lp, AlgoState& s, const AlgoParams& params);

struct RunHooks {
  std::function<void(const AlgoState&)> on_iteration;
};

AlgoState run_stacked(const LiftedProblem& lp, const AlgoParams& params,
                      const Eigen::VectorXd& y0 = {}, const Eigen::VectorXd& u0 = {},
                      const RunHooks& hooks = {});

}  // namespace decopt
