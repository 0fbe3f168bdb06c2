#include <benchmark/benchmark.h>

#include "flownet/analysis.hpp"
#include "flownet/graph.hpp"
#include "flownet/scenario.hpp"

namespace {

flownet::DirectedGraph demo_graph() { return flownet::unbalanced_five_vertex().graph; }

void BM_MinimalCycleCover(benchmark::State& state) {
  const flownet::DirectedGraph g = demo_graph();
  for (auto _ : state) {
    benchmark::DoNotOptimize(flownet::minimal_cycle_cover(g));
  }
}
BENCHMARK(BM_MinimalCycleCover);

void BM_ConstraintConnectivity(benchmark::State& state) {
  const flownet::DirectedGraph g = demo_graph();
  flownet::FlowConstraints c;
  c.lower = Eigen::VectorXd::Zero(g.edge_count());
  c.upper = Eigen::VectorXd::Ones(g.edge_count());
  for (auto _ : state) {
    benchmark::DoNotOptimize(flownet::strongly_connected_wrt_constraints(g, c));
  }
}
BENCHMARK(BM_ConstraintConnectivity);

void BM_BruteForceConnectivity(benchmark::State& state) {
  const flownet::DirectedGraph g = demo_graph();
  flownet::FlowConstraints c;
  c.lower = -Eigen::VectorXd::Ones(g.edge_count());
  c.upper = Eigen::VectorXd::Ones(g.edge_count());
  for (auto _ : state) {
    benchmark::DoNotOptimize(flownet::brute_force_scc_wrt_constraints(g, c));
  }
}
BENCHMARK(BM_BruteForceConnectivity);

void BM_BuildCounterexample(benchmark::State& state) {
  const flownet::DirectedGraph g = demo_graph();
  for (auto _ : state) {
    benchmark::DoNotOptimize(flownet::build_counterexample(g));
  }
}
BENCHMARK(BM_BuildCounterexample);

}  // namespace
