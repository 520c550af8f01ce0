#include <algorithm>
#include <vector>

#include "decopt/algorithm.hpp"
#include "decopt/errors.hpp"
#include "decopt/families.hpp"
#include "decopt/netsim.hpp"
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

struct LocalView {
  std::vector<NodeState> st;
  std::vector<NeighborInbox> inbox;
};

// Splits a stacked state into per-node states and fills every inbox with what
// the message phases would have delivered: neighbor x and u plus the partial
// derivative each neighbor contributes to this node's block.
LocalView split_state(const LiftedProblem& lp, const AlgoState& s) {
  const auto& prob = lp.problem();
  const int n = prob.n();
  const int p = prob.p;
  const int bs = lp.dual_block();
  LocalView out;
  out.st.resize(n);
  out.inbox.resize(n);
  Eigen::VectorXd x = lp.x_part(s.y);

  for (int i = 0; i < n; ++i) {
    out.st[i].x = s.y.segment(lp.x_offset_in_y(i), prob.nodes[i].dim);
    out.st[i].t = s.y.segment(lp.t_offset_in_y(i), p);
    out.st[i].q = s.q.segment(static_cast<Eigen::Index>(i) * p, p);
    out.st[i].u = s.u.segment(static_cast<Eigen::Index>(i) * bs, bs);
    out.st[i].z = s.z.segment(static_cast<Eigen::Index>(i) * bs, bs);
  }
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd v = prob.gather(x, j);
    auto grads = prob.nodes[j].grad_f(v);
    Eigen::VectorXd wj;
    std::vector<Eigen::MatrixXd> jacs;
    if (p > 0) {
      wj = out.st[j].q + prob.nodes[j].g(v) - out.st[j].t;
      jacs = prob.nodes[j].jac_g(v);
    }
    const auto& nb = prob.graph.neighbors(j);
    for (size_t a = 0; a < nb.size(); ++a) {
      const int i = nb[a];
      if (i == j) continue;
      out.inbox[i].x[j] = out.st[j].x;
      out.inbox[i].u[j] = out.st[j].u;
      Eigen::VectorXd cross = grads[a];
      if (p > 0) cross += jacs[a].transpose() * wj;
      out.inbox[i].cross[j] = cross;
    }
  }
  return out;
}

void check_local_matches_stacked(const LiftedProblem& lp, const AlgoState& s,
                                 const AlgoParams& params) {
  const auto& prob = lp.problem();
  Eigen::VectorXd d_ref = compute_d_stacked(lp, s, params);
  LocalView view = split_state(lp, s);
  for (int i = 0; i < prob.n(); ++i) {
    Eigen::VectorXd di =
        compute_d_local(prob, params.weights, i, view.st[i], view.inbox[i], lp.Abar(i),
                        params.rho, s.k + 1);
    const int dim = prob.nodes[i].dim;
    CHECK((di.head(dim) - d_ref.segment(lp.x_offset_in_y(i), dim)).norm() <= 1e-12);
    if (prob.p > 0)
      CHECK((di.tail(prob.p) - d_ref.segment(lp.t_offset_in_y(i), prob.p)).norm() <=
            1e-12);
  }
}

}  // namespace

TEST_CASE("per-node directions assemble the stacked gradient exactly") {
  for (auto prob : {testsup::two_node_coupled(), testsup::small_quadratic()}) {
    auto lp = lift(prob);
    AlgoParams params = params_for(*lp, 0.01);
    AlgoState s = init_state(*lp, params);
    check_local_matches_stacked(*lp, s, params);
    for (int k = 0; k < 8; ++k) step_stacked(*lp, s, params);
    check_local_matches_stacked(*lp, s, params);
  }
}

TEST_CASE("message passing reproduces the stacked trajectory") {
  for (std::uint64_t seed : {1ULL, 2ULL}) {
    auto prob = testsup::small_quadratic(5, 2, 2, 1, seed);
    auto lp = lift(prob);
    AlgoParams params = params_for(*lp, 0.02);
    params.max_iter = 200;

    std::vector<Eigen::VectorXd> ys;
    RunHooks record;
    record.on_iteration = [&](const AlgoState& s) { ys.push_back(s.y); };
    AlgoState ref = run_stacked(*lp, params, {}, {}, record);

    NetworkSim sim(lp, params, false);
    sim.initialize();
    int at = 0;
    RunHooks compare;
    compare.on_iteration = [&](const AlgoState& s) {
      REQUIRE(at < static_cast<int>(ys.size()));
      CHECK((s.y - ys[at]).norm() <= 1e-9 * (1.0 + ys[at].norm()));
      ++at;
    };
    sim.run(200, compare);

    AlgoState got = sim.snapshot();
    CHECK(got.k == ref.k);
    CHECK((got.y - ref.y).norm() <= 1e-9 * (1.0 + ref.y.norm()));
    CHECK((got.q - ref.q).norm() <= 1e-9 * (1.0 + ref.q.norm()));
    CHECK((got.u - ref.u).norm() <= 1e-9 * (1.0 + ref.u.norm()));
    CHECK((got.z - ref.z).norm() <= 1e-9 * (1.0 + ref.z.norm()));
    CHECK((got.average_y() - ref.average_y()).norm() <= 1e-9);
  }
}

TEST_CASE("uncoupled instances take the reduced exchange path and still agree") {
  LinearLogOptions o;
  o.n = 8;
  o.seed = 4;
  auto prob = build_problem(gen_linear_log(o));
  REQUIRE(prob->no_coupling);
  auto lp = lift(prob);
  AlgoParams params = params_for(*lp, 0.05);

  AlgoState ref = run_stacked(*lp, params);
  NetworkSim sim(lp, params);
  sim.run(params.max_iter);
  AlgoState got = sim.snapshot();
  CHECK((got.y - ref.y).norm() <= 1e-9 * (1.0 + ref.y.norm()));
  CHECK((got.u - ref.u).norm() <= 1e-9 * (1.0 + ref.u.norm()));

  // One setup row, then a single dual broadcast per round.
  const auto& rows = sim.audit().rows;
  REQUIRE(rows.size() == 1 + static_cast<size_t>(params.max_iter));
  CHECK(rows[0].phase == MsgPhase::setup);
  const long dir_edges = 2 * static_cast<long>(prob->graph.edges.size());
  const long bs = lp->dual_block();
  CHECK(rows[0].messages == dir_edges);
  CHECK(rows[0].scalars == dir_edges * (bs + 1));
  for (size_t r = 1; r < rows.size(); ++r) {
    CHECK(rows[r].phase == MsgPhase::post_dual_u);
    CHECK(rows[r].messages == dir_edges);
    CHECK(rows[r].scalars == dir_edges * bs);
  }
}

TEST_CASE("every exchange is a neighbor broadcast with the expected size") {
  auto prob = testsup::small_quadratic(6, 2, 2, 1, 9);
  auto lp = lift(prob);
  AlgoParams params = params_for(*lp, 0.02);
  NetworkSim sim(lp, params);
  sim.initialize();
  sim.run(3);

  const long dir_edges = 2 * static_cast<long>(prob->graph.edges.size());
  const int d = 2, m = 2;
  const long bs = lp->dual_block();
  const auto& rows = sim.audit().rows;
  REQUIRE(rows.size() == 1 + 3 * 3);
  CHECK(rows[0].phase == MsgPhase::setup);
  CHECK(rows[0].messages == dir_edges);
  CHECK(rows[0].scalars == dir_edges * (d + bs + m * d));
  for (int r = 0; r < 3; ++r) {
    const auto& cross = rows[1 + 3 * r];
    const auto& px = rows[2 + 3 * r];
    const auto& pu = rows[3 + 3 * r];
    CHECK(cross.phase == MsgPhase::cross_term);
    CHECK(px.phase == MsgPhase::post_primal_x);
    CHECK(pu.phase == MsgPhase::post_dual_u);
    CHECK(cross.round == r + 1);
    for (const auto* row : {&cross, &px, &pu}) CHECK(row->messages == dir_edges);
    CHECK(cross.scalars == dir_edges * d);
    CHECK(px.scalars == dir_edges * d);
    CHECK(pu.scalars == dir_edges * bs);
  }
  CHECK(sim.audit().total_messages() == dir_edges * (1 + 3 * 3));
}

TEST_CASE("missing neighbor values raise descriptive errors") {
  auto prob = testsup::two_node_coupled();
  auto lp = lift(prob);
  AlgoParams params = params_for(*lp, 0.05);
  AlgoState s = init_state(*lp, params);
  LocalView full = split_state(*lp, s);

  NeighborInbox empty;
  CHECK_THROWS_WITH_AS(
      compute_d_local(*prob, params.weights, 0, full.st[0], empty, lp->Abar(0), 1.0, 7),
      "node 0 is missing x from neighbor 1 in round 7", MissingNeighborMessageError);

  NeighborInbox no_cross = full.inbox[0];
  no_cross.cross.clear();
  try {
    compute_d_local(*prob, params.weights, 0, full.st[0], no_cross, lp->Abar(0), 1.0, 3);
    FAIL("expected a missing-message error");
  } catch (const MissingNeighborMessageError& e) {
    CHECK(e.node() == 0);
    CHECK(e.neighbor() == 1);
    CHECK(e.round() == 3);
  }

  NeighborInbox no_u = full.inbox[1];
  no_u.u.clear();
  CHECK_THROWS_AS(
      compute_d_local(*prob, params.weights, 1, full.st[1], no_u, lp->Abar(1), 1.0, 1),
      MissingNeighborMessageError);
}

TEST_CASE("state reads outside the neighborhood are rejected and counted") {
  CoupledQuadraticOptions o;
  o.n = 4;
  o.d = 1;
  o.m = 1;
  o.p = 1;
  o.seed = 12;
  o.graph = path_graph(4);
  auto lp = lift(build_problem(gen_coupled_quadratic(o)));
  AlgoParams params = params_for(*lp, 0.02);
  NetworkSim sim(lp, params);
  sim.initialize();

  CHECK_NOTHROW(sim.peek_x(0, 1));
  CHECK_NOTHROW(sim.peek_x(2, 2));
  CHECK_THROWS_AS(sim.peek_x(0, 3), LocalityViolationError);
  CHECK_THROWS_AS(sim.peek_x(3, 1), LocalityViolationError);
  CHECK(sim.audit().locality_violations == 2);
  CHECK_THROWS_AS(sim.peek_x(0, 9), IndexOutOfRangeError);
}

TEST_CASE("the initial exchange reproduces the stacked starting state") {
  auto prob = testsup::small_quadratic();
  auto lp = lift(prob);
  AlgoParams params = params_for(*lp, 0.02);
  Eigen::VectorXd y0 = Eigen::VectorXd::Constant(lp->dim_y(), 0.4);
  Eigen::VectorXd u0 = Eigen::VectorXd::Constant(lp->dim_u(), -0.2);

  AlgoState want = init_state(*lp, params, y0, u0);
  NetworkSim sim(lp, params);
  CHECK_THROWS_AS(sim.iteration_round(), RuntimeError);
  sim.initialize(y0, u0);
  AlgoState got = sim.snapshot();
  CHECK(got.k == 0);
  CHECK((got.y - want.y).norm() <= 1e-14);
  CHECK((got.q - want.q).norm() <= 1e-14);
  CHECK((got.u - want.u).norm() <= 1e-14);
  CHECK((got.z - want.z).norm() <= 1e-13);
}
