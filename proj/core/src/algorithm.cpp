#include "decopt/algorithm.hpp"

#include "decopt/errors.hpp"

namespace decopt {

Eigen::VectorXd AlgoState::average_y() const {
  if (k == 0) throw RuntimeError("running average requested before the first iteration");
  return ybar_sum / k;
}

namespace {

void check_params(const LiftedProblem& lp, const AlgoParams& params) {
  if (!(params.gamma > 0)) throw InvalidParameterError("gamma must be positive");
  if (!(params.rho > 0)) throw InvalidParameterError("rho must be positive");
  if (params.weights.PW.rows() != lp.n() || params.weights.PH.rows() != lp.n())
    throw ShapeMismatchError("weight matrices do not match the graph size");
  if (params.max_iter < 0) throw InvalidParameterError("max_iter must be nonnegative");
}

}  // namespace

AlgoState init_state(const LiftedProblem& lp, const AlgoParams& params,
                     const Eigen::VectorXd& y0, const Eigen::VectorXd& u0) {
  check_params(lp, params);
  AlgoState s;
  s.k = 0;
  s.y = y0.size() ? y0 : Eigen::VectorXd::Zero(lp.dim_y());
  if (s.y.size() != lp.dim_y()) throw ShapeMismatchError("y0 has wrong length");
  s.y = lp.project_Y(s.y);
  s.u = u0.size() ? u0 : Eigen::VectorXd::Zero(lp.dim_u());
  if (s.u.size() != lp.dim_u()) throw ShapeMismatchError("u0 has wrong length");
  s.u0 = s.u;
  s.q = (-lp.eval_G(s.y)).cwiseMax(0.0);
  s.z = params.rho *
        apply_block_mixing(params.weights.PH, lp.problem().graph, s.u, lp.dual_block());
  s.ybar_sum = Eigen::VectorXd::Zero(lp.dim_y());
  return s;
}

Eigen::VectorXd compute_d_stacked(const LiftedProblem& lp, const AlgoState& s,
                                  const AlgoParams& params) {
  const auto& g = lp.problem().graph;
  Eigen::VectorXd G = lp.eval_G(s.y);
  Eigen::VectorXd v = apply_block_mixing(params.weights.PW, g, s.u, lp.dual_block()) -
                      s.z / params.rho;
  Eigen::VectorXd d = lp.eval_grad_f(s.y);
  d += lp.apply_jacG_T(s.y, s.q + G);
  d += lp.apply_BT(v + (lp.apply_B(s.y) - lp.c()) / params.rho);
  return d;
}

double eval_model(const LiftedProblem& lp, const AlgoState& s, const AlgoParams& params,
                 const Eigen::VectorXd& y) {
  const auto& g = lp.problem().graph;
  Eigen::VectorXd Gk = lp.eval_G(s.y);
  Eigen::VectorXd v = apply_block_mixing(params.weights.PW, g, s.u, lp.dual_block()) -
                      s.z / params.rho;
  Eigen::VectorXd res = lp.apply_B(y) - lp.c();
  return lp.eval_f(y) + (s.q + Gk).dot(lp.eval_G(y)) + v.dot(res) +
         res.squaredNorm() / (2 * params.rho);
}

void step_stacked(const LiftedProblem& lp, AlgoState& s, const AlgoParams& params) {
  const auto& g = lp.problem().graph;
  const int bs = lp.dual_block();

  Eigen::VectorXd d = compute_d_stacked(lp, s, params);
  s.y = lp.project_Y(s.y - params.gamma * d);

  Eigen::VectorXd G = lp.eval_G(s.y);
  s.q = (-G).cwiseMax(s.q + G);

  s.u = apply_block_mixing(params.weights.PW, g, s.u, bs) +
        (lp.apply_B(s.y) - lp.c() - s.z) / params.rho;
  s.z += params.rho * apply_block_mixing(params.weights.PH, g, s.u, bs);

  s.k += 1;
  s.ybar_sum += s.y;
}

AlgoState run_stacked(const LiftedProblem& lp, const AlgoParams& params,
                      const Eigen::VectorXd& y0, const Eigen::VectorXd& u0,
                      const RunHooks& hooks) {
  AlgoState s = init_state(lp, params, y0, u0);
  for (int k = 0; k < params.max_iter; ++k) {
    step_stacked(lp, s, params);
    if (hooks.on_iteration) hooks.on_iteration(s);
  }
  return s;
}

}  // namespace decopt
