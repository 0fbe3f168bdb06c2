#include <doctest.h>

#include <Eigen/Dense>

#include <set>

#include "flownet/graph.hpp"
#include "support.hpp"

using namespace flownet;
namespace ts = flownet::testsupport;

namespace {

DirectedGraph five_vertex_demo_graph() {
  return DirectedGraph(5, {{0, 1}, {1, 2}, {2, 0}, {0, 3}, {3, 2}, {0, 4}, {4, 1}});
}

DirectedGraph directed_triangle() { return DirectedGraph(3, {{0, 1}, {1, 2}, {2, 0}}); }

FlowConstraints uniform_constraints(int m, double lo, double hi) {
  FlowConstraints c;
  c.lower = Eigen::VectorXd::Constant(m, lo);
  c.upper = Eigen::VectorXd::Constant(m, hi);
  return c;
}

int matrix_rank(const Eigen::MatrixXd& b) {
  if (b.cols() == 0) return 0;
  return static_cast<int>(Eigen::FullPivLU<Eigen::MatrixXd>(b).rank());
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("construction rejects self-loops and bad indices") {
  CHECK_THROWS_AS(DirectedGraph(3, {{1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(DirectedGraph(3, {{0, 3}}), std::invalid_argument);
  CHECK_THROWS_AS(DirectedGraph(0, {}), std::invalid_argument);
}

TEST_CASE("incidence matrix of the five-vertex demo graph") {
  const Eigen::MatrixXd b = five_vertex_demo_graph().incidence_matrix();
  Eigen::MatrixXd expected(5, 7);
  // columns: 0->1, 1->2, 2->0, 0->3, 3->2, 0->4, 4->1
  expected << -1, 0, 1, -1, 0, -1, 0,
               1, -1, 0, 0, 0, 0, 1,
               0, 1, -1, 0, 1, 0, 0,
               0, 0, 0, 1, -1, 0, 0,
               0, 0, 0, 0, 0, 1, -1;
  CHECK(b == expected);
}

TEST_CASE("incidence matrix of a single edge and of an empty edge set") {
  const Eigen::MatrixXd b = DirectedGraph(2, {{0, 1}}).incidence_matrix();
  CHECK(b(0, 0) == -1.0);
  CHECK(b(1, 0) == 1.0);
  const Eigen::MatrixXd empty = DirectedGraph(3, {}).incidence_matrix();
  CHECK(empty.rows() == 3);
  CHECK(empty.cols() == 0);
}

TEST_CASE("incidence columns always hold one +1 and one -1") {
  ts::Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const DirectedGraph g = ts::random_weakly_connected(rng, 6, 9);
    const Eigen::MatrixXd b = g.incidence_matrix();
    for (int j = 0; j < b.cols(); ++j) {
      CHECK(b.col(j).sum() == 0.0);
      CHECK(b.col(j).cwiseAbs().sum() == 2.0);
    }
  }
}

TEST_CASE("weak connectivity") {
  CHECK(is_weakly_connected(five_vertex_demo_graph()));
  CHECK_FALSE(is_weakly_connected(DirectedGraph(2, {})));
  // direction is ignored
  CHECK(is_weakly_connected(DirectedGraph(3, {{0, 1}, {2, 1}})));
}

TEST_CASE("rank of the incidence matrix counts components") {
  ts::Rng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    std::uniform_int_distribution<int> nd(2, 7);
    const int n = nd(rng);
    std::uniform_int_distribution<int> md(0, n * (n - 1) / 2);
    std::vector<Edge> edges;
    std::set<std::pair<int, int>> used;
    std::uniform_int_distribution<int> pick(0, n - 1);
    const int m = md(rng);
    while (static_cast<int>(edges.size()) < m) {
      const int a = pick(rng);
      const int b = pick(rng);
      if (a == b || used.count({a, b})) continue;
      used.insert({a, b});
      edges.push_back(Edge{a, b});
    }
    const DirectedGraph g(n, edges);
    CHECK(matrix_rank(g.incidence_matrix()) == n - weak_component_count(g));
  }
}

TEST_CASE("strong connectivity agrees with a reachability oracle") {
  CHECK(is_strongly_connected(five_vertex_demo_graph()));
  CHECK_FALSE(is_strongly_connected(DirectedGraph(2, {{0, 1}})));
  CHECK(is_strongly_connected(directed_triangle()));
  ts::for_each_labeled_digraph(3, 6, [](const DirectedGraph& g) {
    CHECK(is_strongly_connected(g) == ts::oracle_strongly_connected(g));
  });
}

TEST_CASE("balance by degrees matches the incidence column sum") {
  CHECK(is_balanced(directed_triangle()));
  CHECK_FALSE(is_balanced(five_vertex_demo_graph()));  // vertex 0 has out 3, in 1
  CHECK(is_balanced(DirectedGraph(2, {{0, 1}, {1, 0}})));
  ts::for_each_labeled_digraph(3, 6, [](const DirectedGraph& g) {
    const Eigen::VectorXd net = g.incidence_matrix() * Eigen::VectorXd::Ones(g.edge_count());
    const bool incidence_balanced = net.size() == 0 || net.cwiseAbs().maxCoeff() == 0.0;
    CHECK(is_balanced(g) == incidence_balanced);
  });
}

TEST_CASE("canonicalize_orientation flips exactly the edges with zero upper bound") {
  const DirectedGraph g(3, {{0, 1}, {1, 2}, {2, 0}});
  FlowConstraints c;
  c.lower = Eigen::VectorXd(3);
  c.upper = Eigen::VectorXd(3);
  c.lower << -3, 0, -1;
  c.upper << 0, 1, 2;
  const CanonicalForm canon = canonicalize_orientation(g, c);
  CHECK(canon.flipped == std::vector<bool>{true, false, false});
  CHECK(canon.graph.edge(0).tail == 1);
  CHECK(canon.graph.edge(0).head == 0);
  CHECK(canon.constraints.lower[0] == 0.0);
  CHECK(canon.constraints.upper[0] == 3.0);
  // untouched edges keep their intervals
  CHECK(canon.constraints.lower[2] == -1.0);
  CHECK(canon.constraints.upper[2] == 2.0);
  CHECK(canon.constraints.is_canonical());

  // idempotent
  const CanonicalForm again = canonicalize_orientation(canon.graph, canon.constraints);
  CHECK(again.flipped == std::vector<bool>{false, false, false});
  CHECK(again.graph.edge(0).tail == canon.graph.edge(0).tail);
}

TEST_CASE("canonicalize_orientation rejects invalid intervals") {
  const DirectedGraph g(2, {{0, 1}});
  FlowConstraints c;
  c.lower = Eigen::VectorXd::Constant(1, 0.5);  // positive lower bound
  c.upper = Eigen::VectorXd::Constant(1, 1.0);
  CHECK_THROWS_AS(canonicalize_orientation(g, c), std::invalid_argument);
  c.lower[0] = -1.0;
  c.upper[0] = -0.5;  // negative upper bound
  CHECK_THROWS_AS(canonicalize_orientation(g, c), std::invalid_argument);
}

TEST_CASE("constraint-aware strong connectivity") {
  // every edge reversible and the graph weakly connected
  const DirectedGraph path(4, {{0, 1}, {2, 1}, {2, 3}});
  CHECK(strongly_connected_wrt_constraints(path, uniform_constraints(3, -1.0, 1.0)));
  // a single one-way edge has no return path
  CHECK_FALSE(
      strongly_connected_wrt_constraints(DirectedGraph(2, {{0, 1}}), uniform_constraints(1, 0.0, 1.0)));
  // a one-way cycle reaches every pair
  CHECK(strongly_connected_wrt_constraints(directed_triangle(), uniform_constraints(3, 0.0, 1.0)));
}

TEST_CASE("brute-force orientation oracle handles degenerate sizes") {
  CHECK(brute_force_scc_wrt_constraints(DirectedGraph(1, {}), uniform_constraints(0, 0.0, 1.0)));
  CHECK_FALSE(brute_force_scc_wrt_constraints(DirectedGraph(2, {}), uniform_constraints(0, 0.0, 1.0)));
  // limit on the 2^k enumeration
  std::vector<Edge> edges;
  for (int i = 0; i < 21; ++i) edges.push_back(Edge{i, i + 1});
  CHECK_THROWS_AS(
      brute_force_scc_wrt_constraints(DirectedGraph(22, edges), uniform_constraints(21, -1.0, 1.0)),
      std::invalid_argument);
}

TEST_CASE("constraint-aware predicate equals the orientation enumeration") {
  ts::Rng rng(13);
  int cases = 0;
  ts::for_each_labeled_digraph(3, 6, [&](const DirectedGraph& g) {
    const FlowConstraints c = ts::random_constraints(rng, g.edge_count(), 0.5);
    CHECK(strongly_connected_wrt_constraints(g, c) == brute_force_scc_wrt_constraints(g, c));
    ++cases;
  });
  CHECK(cases == 64);  // every labeled digraph on three vertices
}

TEST_CASE("non-overlapping cycle cover of balanced graphs") {
  const auto triangle = non_overlapping_cycle_cover(directed_triangle());
  REQUIRE(triangle.has_value());
  CHECK(triangle->cycles.size() == 1);
  CHECK(triangle->multiplicity == Eigen::VectorXi::Ones(3));
  CHECK(triangle->non_overlapping);

  CHECK_FALSE(non_overlapping_cycle_cover(five_vertex_demo_graph()).has_value());

  // two directed triangles sharing vertex 0
  const DirectedGraph shared(5, {{0, 1}, {1, 2}, {2, 0}, {0, 3}, {3, 4}, {4, 0}});
  const auto cover = non_overlapping_cycle_cover(shared);
  REQUIRE(cover.has_value());
  CHECK(cover->cycles.size() == 2);
  CHECK(cover->cycles[0] == std::vector<int>{0, 1, 2});
  CHECK(cover->cycles[1] == std::vector<int>{3, 4, 5});
}

TEST_CASE("each extracted cycle is a closed walk") {
  ts::Rng rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const DirectedGraph g = ts::random_balanced_strongly_connected(rng, 5, 2);
    const auto cover = non_overlapping_cycle_cover(g);
    REQUIRE(cover.has_value());
    const Eigen::MatrixXd b = g.incidence_matrix();
    for (const auto& cycle : cover->cycles) {
      Eigen::VectorXd indicator = Eigen::VectorXd::Zero(g.edge_count());
      for (int e : cycle) indicator[e] += 1.0;
      CHECK((b * indicator).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("minimal cycle cover of the five-vertex demo graph") {
  const CycleCover cover = minimal_cycle_cover(five_vertex_demo_graph());
  CHECK(cover.cycles.size() == 3);
  CHECK(cover.minimal);
  Eigen::VectorXi expected(7);
  expected << 1, 2, 3, 1, 1, 1, 1;
  CHECK(cover.multiplicity == expected);
  const Eigen::MatrixXd b = five_vertex_demo_graph().incidence_matrix();
  CHECK((b * cover.multiplicity.cast<double>()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("minimal cycle cover basics") {
  CHECK(minimal_cycle_cover(directed_triangle()).cycles.size() == 1);
  CHECK_THROWS_AS(minimal_cycle_cover(DirectedGraph(2, {{0, 1}})), std::invalid_argument);

  // balanced graphs where the minimum count equals the edge-disjoint
  // decomposition size
  const DirectedGraph shared(5, {{0, 1}, {1, 2}, {2, 0}, {0, 3}, {3, 4}, {4, 0}});
  CHECK(minimal_cycle_cover(shared).cycles.size() ==
        non_overlapping_cycle_cover(shared)->cycles.size());
  CHECK(minimal_cycle_cover(directed_triangle()).cycles.size() ==
        non_overlapping_cycle_cover(directed_triangle())->cycles.size());
}

TEST_CASE("minimal cover multiplicities satisfy B T = 0 and T >= 1") {
  for (const DirectedGraph& g : ts::strongly_connected_digraphs_up_to_iso(3, 6)) {
    const CycleCover cover = minimal_cycle_cover(g);
    CHECK(cover.multiplicity.minCoeff() >= 1);
    const Eigen::MatrixXd b = g.incidence_matrix();
    CHECK((b * cover.multiplicity.cast<double>()).cwiseAbs().maxCoeff() == 0.0);
    // T accumulates exactly the chosen cycles
    Eigen::VectorXi total = Eigen::VectorXi::Zero(g.edge_count());
    for (const auto& cycle : cover.cycles) {
      for (int e : cycle) ++total[e];
    }
    CHECK(total == cover.multiplicity);
  }
}

TEST_CASE("greedy fallback covers graphs beyond the exact-solver size") {
  std::vector<Edge> edges;
  for (int i = 0; i < 17; ++i) edges.push_back(Edge{i, (i + 1) % 17});
  const CycleCover cover = minimal_cycle_cover(DirectedGraph(17, edges));
  CHECK_FALSE(cover.minimal);
  CHECK(cover.cycles.size() == 1);
  CHECK(cover.multiplicity == Eigen::VectorXi::Ones(17));
}

}  // TEST_SUITE
