#include <cmath>

#include "decopt/algorithm.hpp"
#include "decopt/errors.hpp"
#include "decopt/mixing.hpp"
#include "decopt/trajectory.hpp"
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

TEST_CASE("an all-zero instance sits still at the origin") {
  auto lp = lift(testsup::zero_problem(4));
  AlgoParams params = params_for(*lp, 0.1);
  AlgoState s = init_state(*lp, params);
  CHECK(s.y.norm() == 0.0);
  CHECK(s.q.norm() == 0.0);
  CHECK(compute_d_stacked(*lp, s, params).norm() == 0.0);
  for (int k = 0; k < 3; ++k) step_stacked(*lp, s, params);
  CHECK(s.y.norm() == 0.0);
  CHECK(s.q.norm() == 0.0);
  CHECK(s.u.norm() == 0.0);
  CHECK(s.z.norm() == 0.0);
  CHECK(s.k == 3);
}

TEST_CASE("initialization projects, seeds the queue and spreads the dual") {
  auto lp = lift(testsup::two_node_coupled());
  AlgoParams params = params_for(*lp, 0.05);

  Eigen::VectorXd y0(4);
  y0 << 5.0, 0.5, -9.0, -0.25;
  Eigen::VectorXd u0(4);
  u0 << 1.0, -2.0, 0.5, 0.25;
  AlgoState s = init_state(*lp, params, y0, u0);

  CHECK(s.y(0) == 2.0);
  CHECK(s.y(1) == 0.5);
  CHECK(s.y(2) == -2.0);
  CHECK(s.y(3) == -0.25);

  Eigen::VectorXd G = lp->eval_G(s.y);
  for (int i = 0; i < G.size(); ++i) {
    CHECK(s.q(i) == doctest::Approx(std::max(-G(i), 0.0)));
    CHECK(std::abs(s.q(i)) <= std::abs(G(i)) + 1e-15);
  }
  CHECK(s.q.norm() <= G.norm() + 1e-15);

  Eigen::VectorXd z_expect =
      params.rho *
      apply_block_mixing(params.weights.PH, lp->problem().graph, u0, lp->dual_block());
  CHECK((s.z - z_expect).norm() <= 1e-14);

  CHECK_THROWS_AS(s.average_y(), RuntimeError);
  CHECK_THROWS_AS(init_state(*lp, params, Eigen::VectorXd::Zero(3)), ShapeMismatchError);
  AlgoParams bad = params;
  bad.gamma = 0.0;
  CHECK_THROWS_AS(init_state(*lp, bad), InvalidParameterError);
}

TEST_CASE("the queue update takes the componentwise larger branch") {
  auto lp = lift(testsup::two_node_coupled());
  AlgoParams params = params_for(*lp, 0.05);
  AlgoState s = init_state(*lp, params);
  for (int k = 0; k < 25; ++k) {
    Eigen::VectorXd q_prev = s.q;
    step_stacked(*lp, s, params);
    Eigen::VectorXd G = lp->eval_G(s.y);
    for (int i = 0; i < G.size(); ++i) {
      CHECK(s.q(i) == doctest::Approx(std::max(q_prev(i) + G(i), -G(i))).epsilon(1e-14));
      CHECK(s.q(i) >= -1e-15);
      CHECK(s.q(i) + G(i) >= -1e-12);
      CHECK(s.q(i) >= std::abs(G(i)) - 1e-12);
    }
  }
}

TEST_CASE("the step direction is the gradient of the local model") {
  auto lp = lift(testsup::two_node_coupled());
  AlgoParams params = params_for(*lp, 0.05);
  AlgoState s = init_state(*lp, params);
  for (int k = 0; k < 5; ++k) step_stacked(*lp, s, params);

  Eigen::VectorXd d = compute_d_stacked(*lp, s, params);
  const double h = 1e-6;
  for (int j = 0; j < lp->dim_y(); ++j) {
    Eigen::VectorXd yp = s.y, ym = s.y;
    yp(j) += h;
    ym(j) -= h;
    const double fd =
        (eval_model(*lp, s, params, yp) - eval_model(*lp, s, params, ym)) / (2 * h);
    CHECK(d(j) == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("the correction variable keeps a zero column sum") {
  auto lp = lift(testsup::small_quadratic());
  AlgoParams params = params_for(*lp, 0.01);
  AlgoState s = init_state(*lp, params);
  const int bs = lp->dual_block();
  for (int k = 0; k < 40; ++k) {
    step_stacked(*lp, s, params);
    Eigen::VectorXd zsum = Eigen::VectorXd::Zero(bs);
    for (int i = 0; i < lp->n(); ++i) zsum += s.z.segment(i * bs, bs);
    CHECK(zsum.norm() <= 1e-10 * (1.0 + s.z.norm()));
  }
}

TEST_CASE("running averages satisfy the queue and dual telescopes") {
  auto lp = lift(testsup::small_quadratic());
  AlgoParams params = params_for(*lp, 0.01);
  params.max_iter = 60;
  RunRecorder rec(lp, params);
  run_stacked(*lp, params, {}, {}, rec.hooks());

  REQUIRE(rec.records().size() == 60);
  for (const auto& r : rec.records()) {
    // G(ybar) <= q/k componentwise, so the gap never goes positive.
    CHECK(r.queue_avg_gap <= 1e-10);
    // Summed lifted residual at the average equals the scaled dual drift sum.
    CHECK(r.dual_sum_gap <= 1e-9);
    CHECK(r.q_min >= 0.0);
    CHECK(r.qG_min >= -1e-12);
    CHECK(r.z_sum_norm <= 1e-9);
    CHECK(r.q_norm >= r.G_norm_iter - 1e-12);
  }

  // ybar_sum really accumulates the iterates.
  AlgoState probe = init_state(*lp, params);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(lp->dim_y());
  for (int k = 0; k < 7; ++k) {
    step_stacked(*lp, probe, params);
    acc += probe.y;
  }
  CHECK((probe.ybar_sum - acc).norm() == 0.0);
  CHECK((probe.average_y() - acc / 7).norm() <= 1e-15);
}
