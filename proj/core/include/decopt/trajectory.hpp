#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <memory>
#include <vector>

#include "decopt/algorithm.hpp"

namespace decopt {

// Per-iteration measurements taken on both the current iterate and the
// running average. Reference-relative fields are NaN when no reference
// solution was supplied.
struct IterationRecord {
  int k = 0;

  double f_iter = 0.0;
  double f_avg = 0.0;
  double obj_gap_iter = 0.0;  // f_iter - f_star, signed
  double obj_gap_avg = 0.0;
  double opt_dist_iter = 0.0;  // ||x^k - x*||
  double opt_dist_avg = 0.0;   // ||xbar^k - x*||

  double ineq_viol_avg = 0.0;  // max(0, max component of sum_i g_i at xbar)
  double eq_viol_avg = 0.0;    // ||sum_i (A_i xbar_{N_i} - b_i)||
  double total_ineq_max_avg = 0.0;  // unclamped max component of sum_i g_i at xbar

  double q_norm = 0.0;
  double u_drift = 0.0;  // ||u^k - u^0|| in the PW-weighted norm

  double G_avg_max = 0.0;       // max component of G(ybar)
  double lifted_eq_norm = 0.0;  // ||sum_i ((B ybar)_i - c_i)||
  double queue_avg_gap = 0.0;   // max component of G(ybar) - q^k/k
  double dual_sum_gap = 0.0;    // ||sum residual - (rho/k) sum_i (u^k - u^0)_i||
  double q_min = 0.0;
  double qG_min = 0.0;     // min component of q^k + G(y^k)
  double G_norm_iter = 0.0;
  double z_sum_norm = 0.0;  // ||sum_i z_i||
};

// Hook target that measures every iterate as it is produced.
class RunRecorder {
 public:
  RunRecorder(std::shared_ptr<const LiftedProblem> lp, AlgoParams params);

  void set_reference(const Eigen::VectorXd& x_star, double f_star);

  RunHooks hooks();
  void observe(const AlgoState& s);

  const std::vector<IterationRecord>& records() const { return records_; }

  // Exact column set, in order: k, obj_err_iter, obj_err_avg, opt_dist_iter,
  // opt_dist_avg, ineq_viol_avg, eq_viol_avg, q_norm, u_drift. Errors are
  // absolute values; numbers are printed with %.17g.
  void write_metrics_csv(std::ostream& out) const;

 private:
  std::shared_ptr<const LiftedProblem> lp_;
  AlgoParams params_;
  bool has_reference_ = false;
  Eigen::VectorXd x_star_;
  double f_star_ = 0.0;
  std::vector<IterationRecord> records_;
};

}  // namespace decopt
