#include "decopt/trajectory.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "decopt/errors.hpp"

namespace decopt {

RunRecorder::RunRecorder(std::shared_ptr<const LiftedProblem> lp, AlgoParams params)
    : lp_(std::move(lp)), params_(std::move(params)) {
  if (!lp_) throw InvalidParameterError("null lifted problem");
}

void RunRecorder::set_reference(const Eigen::VectorXd& x_star, double f_star) {
  if (x_star.size() != lp_->problem().total_dim)
    throw ShapeMismatchError("reference point has wrong length");
  x_star_ = x_star;
  f_star_ = f_star;
  has_reference_ = true;
}

RunHooks RunRecorder::hooks() {
  RunHooks h;
  h.on_iteration = [this](const AlgoState& s) { observe(s); };
  return h;
}

void RunRecorder::observe(const AlgoState& s) {
  const auto& prob = lp_->problem();
  const int bs = lp_->dual_block();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  IterationRecord r;
  r.k = s.k;

  Eigen::VectorXd ybar = s.average_y();
  Eigen::VectorXd x = lp_->x_part(s.y);
  Eigen::VectorXd xbar = lp_->x_part(ybar);

  r.f_iter = prob.total_objective(x);
  r.f_avg = prob.total_objective(xbar);
  if (has_reference_) {
    r.obj_gap_iter = r.f_iter - f_star_;
    r.obj_gap_avg = r.f_avg - f_star_;
    r.opt_dist_iter = (x - x_star_).norm();
    r.opt_dist_avg = (xbar - x_star_).norm();
  } else {
    r.obj_gap_iter = r.obj_gap_avg = r.opt_dist_iter = r.opt_dist_avg = nan;
  }

  if (prob.p > 0) {
    Eigen::VectorXd total_g = prob.total_inequality(xbar);
    r.total_ineq_max_avg = total_g.maxCoeff();
    r.ineq_viol_avg = std::max(0.0, r.total_ineq_max_avg);
  }
  if (prob.m > 0) r.eq_viol_avg = prob.total_equality_residual(xbar).norm();

  r.q_norm = s.q.norm();
  r.u_drift = block_quadratic_norm(params_.weights.PW, prob.graph, s.u - s.u0, bs);

  Eigen::VectorXd G_avg = lp_->eval_G(ybar);
  r.G_avg_max = G_avg.size() ? G_avg.maxCoeff() : 0.0;
  r.queue_avg_gap = G_avg.size() ? (G_avg - s.q / s.k).maxCoeff() : 0.0;

  Eigen::VectorXd res_sum = lp_->block_residual_sum(ybar);
  r.lifted_eq_norm = res_sum.norm();
  Eigen::VectorXd du_sum = Eigen::VectorXd::Zero(bs);
  Eigen::VectorXd z_sum = Eigen::VectorXd::Zero(bs);
  for (int i = 0; i < lp_->n(); ++i) {
    du_sum += (s.u - s.u0).segment(static_cast<Eigen::Index>(i) * bs, bs);
    z_sum += s.z.segment(static_cast<Eigen::Index>(i) * bs, bs);
  }
  r.dual_sum_gap = (res_sum - (params_.rho / s.k) * du_sum).norm();
  r.z_sum_norm = z_sum.norm();

  Eigen::VectorXd G_iter = lp_->eval_G(s.y);
  r.G_norm_iter = G_iter.norm();
  r.q_min = s.q.size() ? s.q.minCoeff() : 0.0;
  r.qG_min = s.q.size() ? (s.q + G_iter).minCoeff() : 0.0;

  records_.push_back(std::move(r));
}

void RunRecorder::write_metrics_csv(std::ostream& out) const {
  out << "k,obj_err_iter,obj_err_avg,opt_dist_iter,opt_dist_avg,"
         "ineq_viol_avg,eq_viol_avg,q_norm,u_drift\n";
  char buf[512];
  for (const auto& r : records_) {
    std::snprintf(buf, sizeof(buf),
                  "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.k,
                  std::abs(r.obj_gap_iter), std::abs(r.obj_gap_avg), r.opt_dist_iter,
                  r.opt_dist_avg, r.ineq_viol_avg, r.eq_viol_avg, r.q_norm, r.u_drift);
    out << buf;
  }
}

}  // namespace decopt
