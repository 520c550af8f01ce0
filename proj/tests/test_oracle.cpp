#include <cmath>

#include "decopt/algorithm.hpp"
#include "decopt/errors.hpp"
#include "decopt/mixing.hpp"
#include "decopt/oracle.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace decopt;

namespace {

AlgoParams params_for(const LiftedProblem& lp, double gamma) {
  AlgoParams p;
  p.gamma = gamma;
  p.rho = 1.0;
  p.weights = build_weight_matrices(lp.problem().graph);
  return p;
}

}  // namespace

TEST_CASE("both baseline solvers recover the closed-form single node optimum") {
  auto inst = testsup::single_node_linear_log();

  RefOptions grid_opts;
  grid_opts.method = RefMethod::grid;
  auto grid = solve_reference(*inst.problem, grid_opts);
  CHECK(grid.method == "grid");
  CHECK(grid.x_star(0) == doctest::Approx(inst.x_star).epsilon(1e-6));
  CHECK(grid.f_star == doctest::Approx(inst.f_star).epsilon(1e-6));
  CHECK(grid.ineq_residual <= 1e-9);
  CHECK_FALSE(grid.budget_exhausted);

  RefOptions pen_opts;
  pen_opts.method = RefMethod::penalty_pg;
  auto pen = solve_reference(*inst.problem, pen_opts);
  CHECK(pen.method == "penalty-pg");
  CHECK(pen.x_star(0) == doctest::Approx(inst.x_star).epsilon(1e-6));
  CHECK(pen.f_star == doctest::Approx(inst.f_star).epsilon(1e-6));
  CHECK(pen.penalty_multiplier_ineq(0) == doctest::Approx(inst.mu_star).epsilon(1e-4));

  auto autod = solve_reference(*inst.problem);
  CHECK(autod.method == "grid");
}

TEST_CASE("the multiplier fit recovers the closed-form dual value") {
  auto inst = testsup::single_node_linear_log();
  auto ref = solve_reference(*inst.problem);
  auto dual = estimate_dual(*inst.problem, ref);

  CHECK(dual.mu(0) == doctest::Approx(inst.mu_star).epsilon(1e-4));
  CHECK(dual.lambda.size() == 1);
  CHECK(dual.lambda(0) == doctest::Approx(dual.mu(0)));
  CHECK(dual.u_star.size() == 2);
  CHECK(dual.u_star(0) == doctest::Approx(dual.nu(0)));
  CHECK(dual.u_star(1) == doctest::Approx(dual.mu(0)));
  CHECK(dual.nu(0) == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(dual.stationarity_residual <= 1e-4);
  CHECK(dual.interior_coords == 1);
  // The all-zero equality column cannot be identified, only pinned.
  CHECK(dual.rank_deficient);
  // The strictly feasible point gives a valid upper envelope.
  CHECK(dual.lambda_norm_slater_bound >= dual.lambda_norm - 1e-6);
  CHECK(std::isfinite(dual.lambda_norm_slater_bound));
}

TEST_CASE("the two baseline methods agree where both apply") {
  LinearLogOptions o;
  o.n = 3;
  o.seed = 8;
  auto prob = build_problem(gen_linear_log(o));

  RefOptions grid_opts;
  grid_opts.method = RefMethod::grid;
  auto grid = solve_reference(*prob, grid_opts);
  RefOptions pen_opts;
  pen_opts.method = RefMethod::penalty_pg;
  auto pen = solve_reference(*prob, pen_opts);

  CHECK(std::abs(grid.f_star - pen.f_star) <= 1e-5 * (1.0 + std::abs(pen.f_star)));
  CHECK((grid.x_star - pen.x_star).norm() <= 1e-3);
}

TEST_CASE("the exhaustive path refuses problems it cannot cover") {
  CHECK_THROWS_AS(
      [] {
        RefOptions o;
        o.method = RefMethod::grid;
        return solve_reference(*testsup::two_node_coupled(), o);
      }(),
      ConfigError);
  // The two node fixture has no point satisfying both summed constraints, so
  // the fallback must hand back honestly large residuals instead of claiming
  // success.
  auto ref = solve_reference(*testsup::two_node_coupled());
  CHECK(ref.method == "penalty-pg");
  CHECK(ref.ineq_residual > 0.1);
  CHECK(ref.eq_residual > 0.1);
}

TEST_CASE("an infeasible box raises instead of returning garbage") {
  auto prob = std::make_shared<CoupledProblem>();
  prob->graph = build_graph(1, {});
  prob->p = 1;
  prob->m = 0;
  prob->nodes.resize(1);
  auto& nd = prob->nodes[0];
  nd.dim = 1;
  nd.lower = Eigen::VectorXd::Zero(1);
  nd.upper = Eigen::VectorXd::Ones(1);
  nd.f = [](const Eigen::VectorXd& v) { return v(0); };
  nd.grad_f = [](const Eigen::VectorXd&) {
    return std::vector<Eigen::VectorXd>{Eigen::VectorXd::Ones(1)};
  };
  nd.g = [](const Eigen::VectorXd& v) {
    return Eigen::VectorXd::Constant(1, v(0) + 2.0);
  };
  nd.jac_g = [](const Eigen::VectorXd&) {
    return std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Ones(1, 1)};
  };
  finalize(*prob);
  CHECK_THROWS_AS(solve_reference(*prob), InfeasibleError);
}

TEST_CASE("penalty multipliers and the stationarity fit tell the same story") {
  auto prob = testsup::small_quadratic(4, 1, 1, 1, 33);
  auto ref = solve_reference(*prob);
  REQUIRE(ref.method == "penalty-pg");
  CHECK(ref.ineq_residual <= 1e-8);
  CHECK(ref.eq_residual <= 1e-8);

  auto dual = estimate_dual(*prob, ref);
  CHECK(dual.interior_coords > 0);
  const double scale = 1.0 + dual.mu.norm() + dual.nu.norm();
  CHECK((dual.mu - ref.penalty_multiplier_ineq).norm() <= 1e-2 * scale);
  CHECK((dual.nu - ref.penalty_multiplier_eq).norm() <= 1e-2 * scale);
  CHECK(dual.stationarity_residual <= 1e-4 * scale);
}

TEST_CASE("assembled guarantee constants satisfy their own identities") {
  auto prob = testsup::small_quadratic(4, 1, 1, 1, 33);
  auto lp = lift(prob);
  auto ref = solve_reference(*prob);
  auto dual = estimate_dual(*prob, ref);
  auto lips = estimate_lipschitz(*prob, 32, 5);
  AlgoParams params = params_for(*lp, 0.01);

  RateConstants rc = compute_constants(*lp, ref, dual, lips, params);
  const int n = lp->n();

  CHECK((rc.y_star - lp->from_parts(ref.x_star, lp->centered_slack(ref.x_star))).norm() ==
        0.0);
  CHECK((rc.z_star - (lp->apply_B(rc.y_star) - lp->c())).norm() == 0.0);
  CHECK(rc.u_stack_norm_w ==
        doctest::Approx(std::sqrt(double(n)) * dual.u_star.norm()).epsilon(1e-10));
  CHECK(rc.u0_norm_w == 0.0);
  CHECK(rc.lambda_norm == doctest::Approx(std::sqrt(double(n)) * dual.mu.norm()));

  const double sqrtC = std::sqrt(std::max(0.0, rc.C));
  CHECK(rc.bound_G_coeff == doctest::Approx(2 * (rc.lambda_norm + sqrtC)).epsilon(1e-12));
  CHECK(rc.bound_total_ineq_coeff ==
        doctest::Approx(2 * n * (rc.lambda_norm + sqrtC) + rc.D0).epsilon(1e-12));
  CHECK(rc.D0 == doctest::Approx(params.rho * std::sqrt(double(n)) *
                                 (rc.u_stack_norm_w + std::sqrt(2 * rc.C / params.rho)))
                     .epsilon(1e-12));

  // C is affine in 1/gamma with slope ||y0 - y*||^2 / 2.
  AlgoParams p2 = params;
  p2.gamma = 0.37;
  RateConstants rc2 = compute_constants(*lp, ref, dual, lips, p2);
  Eigen::VectorXd dy = lp->project_Y(Eigen::VectorXd::Zero(lp->dim_y())) - rc.y_star;
  const double want = 0.5 * dy.squaredNorm() * (1.0 / params.gamma - 1.0 / p2.gamma);
  CHECK(rc.C - rc2.C == doctest::Approx(want).epsilon(1e-10));
  CHECK(rc.gamma_tilde == doctest::Approx(rc2.gamma_tilde).epsilon(1e-12));
}

TEST_CASE("the certified step size reduces to the curvature sum when constraints are affine") {
  auto prob = testsup::small_quadratic(3, 1, 1, 1, 14);
  auto lp = lift(prob);
  auto ref = solve_reference(*prob);
  auto dual = estimate_dual(*prob, ref);

  LipschitzEstimates lips;
  lips.L_f = 1.5;
  lips.L_g = 0.0;
  lips.beta = 1.0;
  lips.L_F = 4.5;
  lips.beta_tilde = std::sqrt(2.0 * 3);

  AlgoParams params = params_for(*lp, 0.01);
  RateConstants rc = compute_constants(*lp, ref, dual, lips, params);
  const double base =
      lp->BtB_norm() / params.rho + lips.beta_tilde * lips.beta_tilde + lips.L_F;
  CHECK(rc.gamma_tilde == doctest::Approx(1.0 / base).epsilon(1e-12));

  AlgoParams at = params;
  at.gamma = rc.gamma_tilde;
  CHECK(compute_constants(*lp, ref, dual, lips, at).gamma_satisfies_bound);
  AlgoParams over = params;
  over.gamma = rc.gamma_tilde * 1.5;
  CHECK_FALSE(compute_constants(*lp, ref, dual, lips, over).gamma_satisfies_bound);
}

TEST_CASE("bound replay counts violations and fits decay slopes") {
  RateConstants c;
  c.bound_G_coeff = 2.0;
  c.D0 = 3.0;
  c.bound_total_ineq_coeff = 5.0;
  c.S0 = 4.0;
  c.C0 = 1.0;

  std::vector<IterationRecord> recs;
  for (int k = 1; k <= 2000; ++k) {
    IterationRecord r;
    r.k = k;
    r.G_avg_max = 1.9 / k;
    r.lifted_eq_norm = 2.9 / k;
    r.total_ineq_max_avg = 4.9 / k;
    r.obj_gap_avg = 3.9 / k;
    recs.push_back(r);
  }

  auto rep = check_rate_bounds(recs, c);
  CHECK(rep.checked == 2000);
  CHECK(rep.all_bounds_hold());
  CHECK(rep.first_violation_k == -1);
  CHECK(rep.min_margin_G == doctest::Approx(0.1 / 2000).epsilon(1e-9));
  CHECK(rep.slope_constraint == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(rep.slope_obj == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(rep.slope_points_constraint == 1901);
  CHECK_FALSE(rep.constraint_below_floor);
  CHECK_FALSE(rep.constraint_hits_floor);

  SUBCASE("a single excursion is pinpointed") {
    recs[49].G_avg_max = 2.1 / 50;
    auto bad = check_rate_bounds(recs, c);
    CHECK(bad.violations_G == 1);
    CHECK(bad.first_violation_k == 50);
    CHECK(bad.min_margin_G < 0.0);
    CHECK_FALSE(bad.all_bounds_hold());
  }

  SUBCASE("tiny overshoot within the slack is tolerated") {
    recs[99].G_avg_max = (2.0 / 100) * (1.0 + 1e-10);
    auto ok = check_rate_bounds(recs, c);
    CHECK(ok.violations_G == 0);
  }

  SUBCASE("a vanished series skips the fit instead of faking a slope") {
    for (auto& r : recs) {
      r.total_ineq_max_avg = 0.0;
      r.obj_gap_avg = 0.0;
    }
    auto rep0 = check_rate_bounds(recs, c);
    CHECK(rep0.constraint_below_floor);
    CHECK(rep0.obj_below_floor);
    CHECK(rep0.constraint_hits_floor);
    CHECK(rep0.slope_points_constraint == 0);
    CHECK(rep0.all_bounds_hold());
  }

  SUBCASE("a series that reaches zero inside the window is flagged") {
    for (auto& r : recs)
      if (r.k > 500) r.total_ineq_max_avg = 0.0;
    auto repz = check_rate_bounds(recs, c);
    CHECK(repz.constraint_hits_floor);
    CHECK_FALSE(repz.constraint_below_floor);
    CHECK(repz.slope_points_constraint == 401);
    CHECK_FALSE(repz.obj_hits_floor);
  }
}
