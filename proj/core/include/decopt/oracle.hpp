#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "decopt/lifted.hpp"
#include "decopt/problem.hpp"
#include "decopt/trajectory.hpp"

namespace decopt {

struct ReferenceSolution {
  Eigen::VectorXd x_star;
  double f_star = 0.0;
  std::string method;
  double ineq_residual = 0.0;  // max(0, max component of the total inequality)
  double eq_residual = 0.0;    // norm of the total equality residual
  bool budget_exhausted = false;
  long evaluations = 0;

  // Multipliers carried out of the penalized solve; empty for the grid path.
  Eigen::VectorXd penalty_multiplier_ineq;
  Eigen::VectorXd penalty_multiplier_eq;
};

enum class RefMethod { automatic, grid, penalty_pg };

struct RefOptions {
  RefMethod method = RefMethod::automatic;
  double tol = 1e-9;        // feasibility target
  long budget = 20000000;   // objective evaluation budget
  int grid_points = 15;     // per-axis resolution of one refinement pass
};

// Baseline solver for the coupled problem. The exhaustive grid path is only
// eligible for tiny instances (total dimension <= 4) with at most one
// inequality row and no active equality part; everything else runs a
// penalized projected-gradient loop with multiplier updates, backtracking
// line search and a doubling penalty schedule.
ReferenceSolution solve_reference(const CoupledProblem& prob, const RefOptions& opts = {});

struct DualEstimate {
  Eigen::VectorXd mu;       // inequality multiplier, length p
  Eigen::VectorXd nu;       // equality multiplier, length m
  Eigen::VectorXd lambda;   // per-node copies of mu, length n*p
  Eigen::VectorXd u_star;   // (nu, mu)
  double lambda_norm = 0.0;
  double stationarity_residual = 0.0;  // max over interior coordinates
  bool rank_deficient = false;
  long interior_coords = 0;

  // Upper bound sqrt(n) * (F(slater) - f*) / min slack; +inf without a
  // strictly feasible point.
  double lambda_norm_slater_bound = 0.0;
};

// Least-squares fit of the stationarity condition over coordinates strictly
// inside their boxes, with inactive inequality rows pinned to zero and the
// result clamped to be nonnegative.
DualEstimate estimate_dual(const CoupledProblem& prob, const ReferenceSolution& ref);

struct RateConstants {
  Eigen::VectorXd lambda_star;
  Eigen::VectorXd u_star;
  Eigen::VectorXd y_star;
  Eigen::VectorXd z_star;

  double f_star = 0.0;
  double lambda_norm = 0.0;
  double lambda_sum = 0.0;
  double u_stack_norm_w = 0.0;  // PW-weighted norm of the stacked copies of u_star
  double u0_norm_w = 0.0;

  double C = 0.0;
  double D0 = 0.0;
  double C0 = 0.0;
  double S0 = 0.0;
  double bound_G_coeff = 0.0;           // numerator of the per-node constraint bound
  double bound_total_ineq_coeff = 0.0;  // numerator of the summed constraint bound

  double gamma_tilde = 0.0;
  double gamma_used = 0.0;
  double rho_used = 0.0;
  bool gamma_satisfies_bound = false;
  bool negative_C = false;

  LipschitzEstimates lips;
  double BtB_norm = 0.0;
};

// Assembles every constant of the O(1/k) guarantees from the reference
// solution, the dual estimate and the sampled curvature numbers, for the
// initial point the solver itself would use (projected origin, zero duals)
// unless explicit y0/u0 are given. gamma_tilde is the largest step size the
// guarantee certifies; gamma_satisfies_bound reports whether params.gamma is
// covered.
RateConstants compute_constants(const LiftedProblem& lp, const ReferenceSolution& ref,
                                const DualEstimate& dual, const LipschitzEstimates& lips,
                                const AlgoParams& params, const Eigen::VectorXd& y0 = {},
                                const Eigen::VectorXd& u0 = {});

struct BoundCheckOptions {
  double rel_slack = 1e-9;
  double abs_slack = 1e-12;
  int slope_k_min = 100;
  int slope_k_max = 10000;
  double slope_floor = 1e-15;
};

struct BoundCheckReport {
  long checked = 0;
  long violations_G = 0;          // per-node averaged constraint vs its bound
  long violations_eq = 0;         // summed residual norm vs its bound
  long violations_total_ineq = 0; // summed inequality vs its bound
  long violations_obj_upper = 0;
  long violations_obj_lower = 0;
  int first_violation_k = -1;
  double min_margin_G = 0.0;   // min over k of bound - value; negative means violated
  double min_margin_eq = 0.0;
  double min_margin_total_ineq = 0.0;
  double min_margin_obj_upper = 0.0;
  double min_margin_obj_lower = 0.0;

  double slope_constraint = 0.0;
  double slope_obj = 0.0;
  int slope_points_constraint = 0;
  int slope_points_obj = 0;
  bool constraint_below_floor = false;  // series vanished, fit skipped
  bool obj_below_floor = false;
  // The series touched the floor inside the window: it reached (numerical)
  // zero, so a fitted slope mostly measures the crossing, not the decay.
  bool constraint_hits_floor = false;
  bool obj_hits_floor = false;

  bool all_bounds_hold() const {
    return violations_G == 0 && violations_eq == 0 && violations_total_ineq == 0 &&
           violations_obj_upper == 0 && violations_obj_lower == 0;
  }
};

// Replays recorded iterations against the theoretical envelopes and fits
// log-log decay slopes over the configured window.
BoundCheckReport check_rate_bounds(const std::vector<IterationRecord>& records,
                                   const RateConstants& constants,
                                   const BoundCheckOptions& opts = {});

}  // namespace decopt
