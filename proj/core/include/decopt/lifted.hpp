#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "decopt/problem.hpp"

namespace decopt {

// Reformulation with per-node slack blocks: each node's lifted variable is
// y_i = (x_i, t_i) with t_i in R^p, the inequality becomes the per-node
// condition G_i(y) = g_i(x_{N_i}) - t_i <= 0, and the networked equality plus
// the requirement sum_i t_i = 0 become the linear system B y = c with
// B = diag(B_i), B_i = [[Abar_i, 0], [0, I_p]], c_i = (b_i, 0), where
// Abar_i = sum_{j in N_i} A_{j,i} collects every neighbor's coupling block
// that acts on x_i.
class LiftedProblem {
 public:
  explicit LiftedProblem(std::shared_ptr<const CoupledProblem> prob);

  const CoupledProblem& problem() const { return *prob_; }
  std::shared_ptr<const CoupledProblem> problem_ptr() const { return prob_; }

  int n() const { return prob_->n(); }
  int p() const { return prob_->p; }
  int m() const { return prob_->m; }
  int node_dim(int i) const { return prob_->nodes[i].dim; }
  int dual_block() const { return prob_->m + prob_->p; }

  int dim_y() const { return dim_y_; }
  int dim_q() const { return n() * p(); }
  int dim_u() const { return n() * dual_block(); }

  int y_offset(int i) const { return y_off_[i]; }
  int x_offset_in_y(int i) const { return y_off_[i]; }
  int t_offset_in_y(int i) const { return y_off_[i] + prob_->nodes[i].dim; }

  const Eigen::MatrixXd& Abar(int i) const { return Abar_[i]; }
  Eigen::VectorXd c_block(int i) const;
  const Eigen::VectorXd& c() const { return c_; }
  double BtB_norm() const { return btb_norm_; }

  // Split and join between y and its (stacked x, stacked t) parts.
  Eigen::VectorXd x_part(const Eigen::VectorXd& y) const;
  Eigen::VectorXd t_part(const Eigen::VectorXd& y) const;
  Eigen::VectorXd from_parts(const Eigen::VectorXd& x, const Eigen::VectorXd& t) const;

  // Slack construction that makes any stacked x a lifted point with
  // sum_i t_i = 0: t_i = g_i(x_{N_i}) - (1/n) sum_j g_j(x_{N_j}).
  Eigen::VectorXd centered_slack(const Eigen::VectorXd& x) const;

  // x_{N_i} gathered from the lifted vector.
  Eigen::VectorXd gather_x(const Eigen::VectorXd& y, int i) const;

  double eval_f(const Eigen::VectorXd& y) const;
  Eigen::VectorXd eval_grad_f(const Eigen::VectorXd& y) const;
  // G(y) stacked over nodes, length n*p.
  Eigen::VectorXd eval_G(const Eigen::VectorXd& y) const;
  // Jac G(y)^T w for w of length n*p.
  Eigen::VectorXd apply_jacG_T(const Eigen::VectorXd& y, const Eigen::VectorXd& w) const;
  // Clamps the x coordinates to their boxes; slacks are unconstrained.
  Eigen::VectorXd project_Y(const Eigen::VectorXd& y) const;

  Eigen::VectorXd apply_B(const Eigen::VectorXd& y) const;
  Eigen::VectorXd apply_BT(const Eigen::VectorXd& v) const;

  // sum over nodes of the dual-block residual (Abar_i x_i - b_i, t_i),
  // equal to (1 (x) I)^T (B y - c).
  Eigen::VectorXd block_residual_sum(const Eigen::VectorXd& y) const;

 private:
  std::shared_ptr<const CoupledProblem> prob_;
  std::vector<int> y_off_;
  int dim_y_ = 0;
  std::vector<Eigen::MatrixXd> Abar_;
  Eigen::VectorXd c_;
  double btb_norm_ = 0.0;
};

std::shared_ptr<LiftedProblem> lift(std::shared_ptr<const CoupledProblem> prob);

}  // namespace decopt
