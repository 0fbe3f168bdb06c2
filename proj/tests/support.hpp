#pragma once

// Shared generators, exhaustive enumerations and scenario builders for the
// unit and acceptance suites.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "flownet/analysis.hpp"
#include "flownet/dynamics.hpp"
#include "flownet/graph.hpp"
#include "flownet/scenario.hpp"

namespace flownet::testsupport {

using Rng = std::mt19937_64;

inline Eigen::VectorXd random_vector(Rng& rng, int size, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Eigen::VectorXd v(size);
  for (int i = 0; i < size; ++i) v[i] = dist(rng);
  return v;
}

// Multiples of 1/64 so that paired inflow/outflow rates cancel exactly.
inline double dyadic_rate(Rng& rng) {
  std::uniform_int_distribution<int> dist(1, 64);
  return static_cast<double>(dist(rng)) / 64.0;
}

// ---------------------------------------------------------------------------
// exhaustive enumeration of labeled simple digraphs (no self-loops, at most
// one arc per ordered pair)

template <typename F>
void for_each_labeled_digraph(int n, int max_m, F&& f) {
  std::vector<Edge> slots;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) slots.push_back(Edge{i, j});
    }
  }
  const int s = static_cast<int>(slots.size());
  for (std::uint32_t mask = 0; mask < (1u << s); ++mask) {
    if (std::popcount(mask) > max_m) continue;
    std::vector<Edge> edges;
    for (int b = 0; b < s; ++b) {
      if (mask & (1u << b)) edges.push_back(slots[static_cast<size_t>(b)]);
    }
    f(DirectedGraph(n, std::move(edges)));
  }
}

// Canonical arc bitmask under vertex relabeling (n <= 8).
inline std::uint64_t canonical_arc_mask(const DirectedGraph& g) {
  const int n = g.vertex_count();
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::uint64_t best = ~0ull;
  do {
    std::uint64_t mask = 0;
    for (const Edge& e : g.edges()) {
      mask |= 1ull << (perm[static_cast<size_t>(e.tail)] * n + perm[static_cast<size_t>(e.head)]);
    }
    best = std::min(best, mask);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Strongly connected digraphs with 2 <= n <= max_n and m <= max_m, one
// representative per isomorphism class.
inline std::vector<DirectedGraph> strongly_connected_digraphs_up_to_iso(int max_n, int max_m) {
  std::vector<DirectedGraph> graphs;
  for (int n = 2; n <= max_n; ++n) {
    std::set<std::uint64_t> seen;
    for_each_labeled_digraph(n, max_m, [&](const DirectedGraph& g) {
      if (!is_strongly_connected(g)) return;
      if (g.edge_count() == 0) return;
      if (seen.insert(canonical_arc_mask(g)).second) graphs.push_back(g);
    });
  }
  return graphs;
}

// ---------------------------------------------------------------------------
// independent reachability oracle (Floyd-Warshall style)

inline bool oracle_strongly_connected(const DirectedGraph& g) {
  const int n = g.vertex_count();
  std::vector<std::vector<char>> reach(static_cast<size_t>(n),
                                       std::vector<char>(static_cast<size_t>(n), 0));
  for (int v = 0; v < n; ++v) reach[static_cast<size_t>(v)][static_cast<size_t>(v)] = 1;
  for (const Edge& e : g.edges()) reach[static_cast<size_t>(e.tail)][static_cast<size_t>(e.head)] = 1;
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (reach[static_cast<size_t>(i)][static_cast<size_t>(k)] &&
            reach[static_cast<size_t>(k)][static_cast<size_t>(j)]) {
          reach[static_cast<size_t>(i)][static_cast<size_t>(j)] = 1;
        }
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!reach[static_cast<size_t>(i)][static_cast<size_t>(j)]) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// random graph generators

inline DirectedGraph random_weakly_connected(Rng& rng, int n, int m) {
  std::vector<Edge> edges;
  std::set<std::pair<int, int>> used;
  std::uniform_int_distribution<int> coin(0, 1);
  for (int v = 1; v < n; ++v) {
    std::uniform_int_distribution<int> pick(0, v - 1);
    const int w = pick(rng);
    const Edge e = coin(rng) ? Edge{w, v} : Edge{v, w};
    edges.push_back(e);
    used.insert({e.tail, e.head});
  }
  std::uniform_int_distribution<int> pick(0, n - 1);
  int guard = 0;
  while (static_cast<int>(edges.size()) < m && guard < 10000) {
    ++guard;
    const int a = pick(rng);
    const int b = pick(rng);
    if (a == b || used.count({a, b})) continue;
    edges.push_back(Edge{a, b});
    used.insert({a, b});
  }
  return DirectedGraph(n, std::move(edges));
}

// Union of directed cycles (one spanning, extras best-effort) without
// duplicate arcs: balanced and strongly connected by construction. Extra
// cycles that collide with already-used arcs are skipped after a few tries,
// so small vertex counts may end up with fewer extras.
inline DirectedGraph random_balanced_strongly_connected(Rng& rng, int n, int extra_cycles) {
  std::set<std::pair<int, int>> used;
  std::vector<Edge> edges;

  auto try_add_cycle = [&](const std::vector<int>& order) {
    for (size_t i = 0; i < order.size(); ++i) {
      const int a = order[i];
      const int b = order[(i + 1) % order.size()];
      if (a == b || used.count({a, b})) return false;
    }
    for (size_t i = 0; i < order.size(); ++i) {
      const int a = order[i];
      const int b = order[(i + 1) % order.size()];
      used.insert({a, b});
      edges.push_back(Edge{a, b});
    }
    return true;
  };

  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  try_add_cycle(order);

  for (int c = 0; c < extra_cycles; ++c) {
    for (int attempt = 0; attempt < 20; ++attempt) {
      std::uniform_int_distribution<int> len_dist(2, n);
      const int len = len_dist(rng);
      std::vector<int> subset(static_cast<size_t>(n));
      std::iota(subset.begin(), subset.end(), 0);
      std::shuffle(subset.begin(), subset.end(), rng);
      subset.resize(static_cast<size_t>(len));
      if (try_add_cycle(subset)) break;
    }
  }
  return DirectedGraph(n, std::move(edges));
}

inline FlowConstraints unit_unidirectional_constraints(int m) {
  FlowConstraints c;
  c.lower = Eigen::VectorXd::Zero(m);
  c.upper = Eigen::VectorXd::Ones(m);
  return c;
}

inline FlowConstraints random_constraints(Rng& rng, int m, double p_bidirectional) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  FlowConstraints c;
  c.lower = Eigen::VectorXd::Zero(m);
  c.upper = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < m; ++i) {
    c.upper[i] = mag(rng);
    c.lower[i] = unit(rng) < p_bidirectional ? -mag(rng) : 0.0;
  }
  return c;
}

// In/outflow pairs with identical dyadic rates inside the given vertex set,
// so the net injection sums to exactly zero there.
inline DisturbanceModel balanced_pair_disturbance(Rng& rng, int n,
                                                  const std::vector<int>& vertices, int pairs) {
  DisturbanceModel dist;
  dist.terminals = Eigen::MatrixXd::Zero(n, 2 * pairs);
  dist.rates = Eigen::VectorXd::Zero(2 * pairs);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(vertices.size()) - 1);
  for (int p = 0; p < pairs; ++p) {
    int a = vertices[static_cast<size_t>(pick(rng))];
    int b = vertices[static_cast<size_t>(pick(rng))];
    while (b == a) b = vertices[static_cast<size_t>(pick(rng))];
    const double rate = dyadic_rate(rng);
    dist.terminals(a, 2 * p) = 1.0;
    dist.rates[2 * p] = rate;
    dist.terminals(b, 2 * p + 1) = -1.0;
    dist.rates[2 * p + 1] = rate;
  }
  return dist;
}

// Terminal columns realizing a prescribed net injection (one column per
// vertex with a nonzero entry).
inline DisturbanceModel disturbance_for_injection(const Eigen::VectorXd& injection) {
  std::vector<int> active;
  for (int v = 0; v < injection.size(); ++v) {
    if (injection[v] != 0.0) active.push_back(v);
  }
  DisturbanceModel dist;
  dist.terminals = Eigen::MatrixXd::Zero(injection.size(), static_cast<int>(active.size()));
  dist.rates = Eigen::VectorXd::Zero(static_cast<int>(active.size()));
  for (size_t j = 0; j < active.size(); ++j) {
    const int v = active[j];
    dist.terminals(v, static_cast<int>(j)) = injection[v] > 0.0 ? 1.0 : -1.0;
    dist.rates[static_cast<int>(j)] = std::abs(injection[v]);
  }
  return dist;
}

// ---------------------------------------------------------------------------
// scenario builders

inline Scenario make_pi_scenario(DirectedGraph graph, Eigen::VectorXd gains,
                                 std::optional<DisturbanceModel> dist, Eigen::VectorXd x0,
                                 Eigen::VectorXd xc0, double step, double horizon, int stride,
                                 const std::string& name = "pi") {
  Scenario s{
      .name = name,
      .notes = "",
      .graph = std::move(graph),
      .constraints = std::nullopt,
      .hamiltonian = Hamiltonian::quadratic(static_cast<int>(x0.size())),
      .controller = ControllerSpec{ControllerSpec::Kind::PI, std::move(gains)},
      .disturbance = std::move(dist),
      .x0 = std::move(x0),
      .xc0 = std::move(xc0),
      .integrator = IntegratorParams{step, horizon, stride, std::nullopt, std::nullopt},
  };
  s.validate();
  return s;
}

inline Scenario make_saturated_scenario(DirectedGraph graph, FlowConstraints constraints,
                                        std::optional<DisturbanceModel> dist, Eigen::VectorXd x0,
                                        Eigen::VectorXd xc0, double step, double horizon,
                                        int stride, const std::string& name = "saturated") {
  Scenario s{
      .name = name,
      .notes = "",
      .graph = std::move(graph),
      .constraints = std::move(constraints),
      .hamiltonian = Hamiltonian::quadratic(static_cast<int>(x0.size())),
      .controller = ControllerSpec{ControllerSpec::Kind::SaturatedPI, Eigen::VectorXd()},
      .disturbance = std::move(dist),
      .x0 = std::move(x0),
      .xc0 = std::move(xc0),
      .integrator = IntegratorParams{step, horizon, stride, std::nullopt, std::nullopt},
  };
  s.validate();
  return s;
}

}  // namespace flownet::testsupport
