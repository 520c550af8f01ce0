#include <benchmark/benchmark.h>

#include "decopt/algorithm.hpp"
#include "decopt/families.hpp"
#include "decopt/netsim.hpp"

namespace {

struct Fixture {
  std::shared_ptr<decopt::LiftedProblem> lp;
  decopt::AlgoParams params;
};

Fixture make_quadratic(int n) {
  decopt::CoupledQuadraticOptions o;
  o.n = n;
  o.seed = 7;
  auto prob = decopt::build_problem(decopt::gen_coupled_quadratic(o));
  Fixture fx;
  fx.lp = decopt::lift(prob);
  fx.params.gamma = 0.01;
  fx.params.rho = 1.0;
  fx.params.weights = decopt::build_weight_matrices(prob->graph);
  return fx;
}

void BM_StackedStep(benchmark::State& state) {
  Fixture fx = make_quadratic(static_cast<int>(state.range(0)));
  decopt::AlgoState s = decopt::init_state(*fx.lp, fx.params);
  for (auto _ : state) {
    decopt::step_stacked(*fx.lp, s, fx.params);
    benchmark::DoNotOptimize(s.y.data());
  }
}
BENCHMARK(BM_StackedStep)->Arg(8)->Arg(32);

void BM_SimRound(benchmark::State& state) {
  Fixture fx = make_quadratic(static_cast<int>(state.range(0)));
  decopt::NetworkSim sim(fx.lp, fx.params, false);
  sim.initialize();
  for (auto _ : state) {
    sim.iteration_round();
    benchmark::DoNotOptimize(sim.round());
  }
}
BENCHMARK(BM_SimRound)->Arg(8)->Arg(32);

void BM_BuildWeights(benchmark::State& state) {
  decopt::Graph g = decopt::random_geometric_graph(static_cast<int>(state.range(0)), 4.0, 11);
  for (auto _ : state) {
    auto wp = decopt::build_weight_matrices(g);
    benchmark::DoNotOptimize(wp.PW.data());
  }
}
BENCHMARK(BM_BuildWeights)->Arg(50)->Arg(200);

void BM_DirectionStacked(benchmark::State& state) {
  Fixture fx = make_quadratic(static_cast<int>(state.range(0)));
  decopt::AlgoState s = decopt::init_state(*fx.lp, fx.params);
  for (auto _ : state) {
    Eigen::VectorXd d = decopt::compute_d_stacked(*fx.lp, s, fx.params);
    benchmark::DoNotOptimize(d.data());
  }
}
BENCHMARK(BM_DirectionStacked)->Arg(8)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
