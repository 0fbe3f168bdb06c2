#include <benchmark/benchmark.h>

#include "flownet/analysis.hpp"
#include "flownet/scenario.hpp"
#include "flownet/sim.hpp"

namespace {

void BM_IntegrateDemo(benchmark::State& state) {
  flownet::Scenario s = flownet::unbalanced_five_vertex();
  s.integrator.horizon = static_cast<double>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(flownet::integrate(s));
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<int64_t>(s.integrator.horizon / s.integrator.step));
}
BENCHMARK(BM_IntegrateDemo)->Arg(10)->Arg(100);

void BM_RhsSaturated(benchmark::State& state) {
  const flownet::Scenario s = flownet::unbalanced_five_vertex();
  const Eigen::MatrixXd b = s.graph.incidence_matrix();
  for (auto _ : state) {
    benchmark::DoNotOptimize(flownet::scenario_rhs(s, b, s.x0, s.xc0));
  }
}
BENCHMARK(BM_RhsSaturated);

void BM_SolveMatching(benchmark::State& state) {
  const flownet::Scenario s = flownet::unbalanced_five_vertex();
  for (auto _ : state) {
    benchmark::DoNotOptimize(flownet::solve_matching(s.graph, *s.disturbance));
  }
}
BENCHMARK(BM_SolveMatching);

}  // namespace

BENCHMARK_MAIN();
