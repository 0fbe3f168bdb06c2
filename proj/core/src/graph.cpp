#include "flownet/graph.hpp"

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <deque>
#include <set>
#include <stdexcept>
#include <string>

namespace flownet {

namespace {

std::vector<std::vector<int>> out_edge_lists(const DirectedGraph& g) {
  std::vector<std::vector<int>> out(static_cast<size_t>(g.vertex_count()));
  for (int j = 0; j < g.edge_count(); ++j) {
    out[static_cast<size_t>(g.edge(j).tail)].push_back(j);
  }
  return out;
}

// Union-find over vertices.
struct DisjointSets {
  explicit DisjointSets(int n) : parent(static_cast<size_t>(n)) {
    for (int i = 0; i < n; ++i) parent[static_cast<size_t>(i)] = i;
  }
  int find(int v) {
    while (parent[static_cast<size_t>(v)] != v) {
      parent[static_cast<size_t>(v)] = parent[static_cast<size_t>(parent[static_cast<size_t>(v)])];
      v = parent[static_cast<size_t>(v)];
    }
    return v;
  }
  void unite(int a, int b) { parent[static_cast<size_t>(find(a))] = find(b); }
  std::vector<int> parent;
};

// Strong connectivity of an arbitrary arc list via double BFS from vertex 0:
// a digraph is strongly connected iff some vertex reaches all others and is
// reached by all others.
bool strongly_connected_arcs(int n, const std::vector<std::pair<int, int>>& arcs) {
  if (n <= 1) return true;
  std::vector<std::vector<int>> fwd(static_cast<size_t>(n)), bwd(static_cast<size_t>(n));
  for (const auto& [a, b] : arcs) {
    fwd[static_cast<size_t>(a)].push_back(b);
    bwd[static_cast<size_t>(b)].push_back(a);
  }
  auto reaches_all = [n](const std::vector<std::vector<int>>& adj) {
    std::vector<char> seen(static_cast<size_t>(n), 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    int count = 1;
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      for (int w : adj[static_cast<size_t>(v)]) {
        if (!seen[static_cast<size_t>(w)]) {
          seen[static_cast<size_t>(w)] = 1;
          ++count;
          queue.push_back(w);
        }
      }
    }
    return count == n;
  };
  return reaches_all(fwd) && reaches_all(bwd);
}

std::vector<char> reachable_from(int n, const std::vector<std::vector<int>>& adj, int start) {
  std::vector<char> seen(static_cast<size_t>(n), 0);
  std::deque<int> queue{start};
  seen[static_cast<size_t>(start)] = 1;
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (int w : adj[static_cast<size_t>(v)]) {
      if (!seen[static_cast<size_t>(w)]) {
        seen[static_cast<size_t>(w)] = 1;
        queue.push_back(w);
      }
    }
  }
  return seen;
}

}  // namespace

DirectedGraph::DirectedGraph(int vertex_count, std::vector<Edge> edges)
    : n_(vertex_count), edges_(std::move(edges)) {
  if (n_ <= 0) throw std::invalid_argument("graph.n: vertex count must be positive");
  for (size_t j = 0; j < edges_.size(); ++j) {
    const Edge& e = edges_[j];
    if (e.tail < 0 || e.tail >= n_ || e.head < 0 || e.head >= n_) {
      throw std::invalid_argument("graph.edges[" + std::to_string(j) + "]: vertex index out of range");
    }
    if (e.tail == e.head) {
      throw std::invalid_argument("graph.edges[" + std::to_string(j) + "]: self-loops are not allowed");
    }
  }
}

Eigen::MatrixXd DirectedGraph::incidence_matrix() const {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n_, edge_count());
  for (int j = 0; j < edge_count(); ++j) {
    b(edges_[static_cast<size_t>(j)].head, j) = 1.0;
    b(edges_[static_cast<size_t>(j)].tail, j) = -1.0;
  }
  return b;
}

std::vector<int> DirectedGraph::out_degrees() const {
  std::vector<int> deg(static_cast<size_t>(n_), 0);
  for (const Edge& e : edges_) ++deg[static_cast<size_t>(e.tail)];
  return deg;
}

std::vector<int> DirectedGraph::in_degrees() const {
  std::vector<int> deg(static_cast<size_t>(n_), 0);
  for (const Edge& e : edges_) ++deg[static_cast<size_t>(e.head)];
  return deg;
}

DirectedGraph DirectedGraph::with_flipped_edges(const std::vector<bool>& flip) const {
  if (flip.size() != edges_.size()) {
    throw std::invalid_argument("flip mask size does not match edge count");
  }
  std::vector<Edge> flipped = edges_;
  for (size_t j = 0; j < flipped.size(); ++j) {
    if (flip[j]) std::swap(flipped[j].tail, flipped[j].head);
  }
  return DirectedGraph(n_, std::move(flipped));
}

bool FlowConstraints::is_canonical() const {
  for (int i = 0; i < size(); ++i) {
    if (!(lower[i] <= 0.0 && 0.0 < upper[i])) return false;
  }
  return true;
}

void FlowConstraints::validate(int edge_count) const {
  if (lower.size() != edge_count || upper.size() != edge_count) {
    throw std::invalid_argument("constraints: bound vectors must have one entry per edge");
  }
  for (int i = 0; i < size(); ++i) {
    if (!(lower[i] <= 0.0)) {
      throw std::invalid_argument("constraints.lower[" + std::to_string(i) + "]: must be <= 0");
    }
    if (!(upper[i] >= 0.0)) {
      throw std::invalid_argument("constraints.upper[" + std::to_string(i) + "]: must be >= 0");
    }
    if (!(lower[i] < upper[i])) {
      throw std::invalid_argument("constraints.upper[" + std::to_string(i) + "]: must exceed lower bound");
    }
  }
}

CanonicalForm canonicalize_orientation(const DirectedGraph& g, const FlowConstraints& c) {
  c.validate(g.edge_count());
  std::vector<bool> flip(static_cast<size_t>(g.edge_count()), false);
  FlowConstraints out = c;
  for (int i = 0; i < g.edge_count(); ++i) {
    if (c.upper[i] == 0.0) {
      flip[static_cast<size_t>(i)] = true;
      out.lower[i] = -c.upper[i];
      out.upper[i] = -c.lower[i];
    }
  }
  return CanonicalForm{g.with_flipped_edges(flip), std::move(out), std::move(flip)};
}

bool is_weakly_connected(const DirectedGraph& g) {
  return weak_component_count(g) == 1;
}

std::vector<int> weak_components(const DirectedGraph& g) {
  DisjointSets sets(g.vertex_count());
  for (const Edge& e : g.edges()) sets.unite(e.tail, e.head);
  std::vector<int> id(static_cast<size_t>(g.vertex_count()), -1);
  int next = 0;
  for (int v = 0; v < g.vertex_count(); ++v) {
    int root = sets.find(v);
    if (id[static_cast<size_t>(root)] < 0) id[static_cast<size_t>(root)] = next++;
    id[static_cast<size_t>(v)] = id[static_cast<size_t>(root)];
  }
  return id;
}

int weak_component_count(const DirectedGraph& g) {
  const std::vector<int> id = weak_components(g);
  return id.empty() ? 0 : *std::max_element(id.begin(), id.end()) + 1;
}

bool is_strongly_connected(const DirectedGraph& g) {
  std::vector<std::pair<int, int>> arcs;
  arcs.reserve(static_cast<size_t>(g.edge_count()));
  for (const Edge& e : g.edges()) arcs.emplace_back(e.tail, e.head);
  return strongly_connected_arcs(g.vertex_count(), arcs);
}

bool is_balanced(const DirectedGraph& g) {
  const std::vector<int> in = g.in_degrees();
  const std::vector<int> out = g.out_degrees();
  bool by_degrees = true;
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (in[static_cast<size_t>(v)] != out[static_cast<size_t>(v)]) by_degrees = false;
  }
  // Cross-check against the column sum of the incidence matrix, kept in
  // integer arithmetic so the equivalence is exact.
  std::vector<long long> net(static_cast<size_t>(g.vertex_count()), 0);
  for (const Edge& e : g.edges()) {
    ++net[static_cast<size_t>(e.head)];
    --net[static_cast<size_t>(e.tail)];
  }
  bool by_incidence = std::all_of(net.begin(), net.end(), [](long long x) { return x == 0; });
  assert(by_degrees == by_incidence);
  return by_degrees && by_incidence;
}

bool strongly_connected_wrt_constraints(const DirectedGraph& g, const FlowConstraints& c) {
  c.validate(g.edge_count());
  if (!c.is_canonical()) {
    throw std::invalid_argument("constraints: canonical orientation required (lower <= 0 < upper)");
  }
  std::vector<std::pair<int, int>> arcs;
  for (int j = 0; j < g.edge_count(); ++j) {
    const Edge& e = g.edge(j);
    arcs.emplace_back(e.tail, e.head);
    if (c.is_bidirectional(j)) arcs.emplace_back(e.head, e.tail);
  }
  return strongly_connected_arcs(g.vertex_count(), arcs);
}

bool brute_force_scc_wrt_constraints(const DirectedGraph& g, const FlowConstraints& c) {
  c.validate(g.edge_count());
  if (!c.is_canonical()) {
    throw std::invalid_argument("constraints: canonical orientation required (lower <= 0 < upper)");
  }
  std::vector<int> flexible;
  for (int j = 0; j < g.edge_count(); ++j) {
    if (c.is_bidirectional(j)) flexible.push_back(j);
  }
  if (flexible.size() > 20) {
    throw std::invalid_argument("brute_force_scc_wrt_constraints: more than 20 bidirectional edges");
  }
  const int n = g.vertex_count();
  if (n <= 1) return true;

  // reached(v1, v2) accumulated over all compatible orientations.
  std::vector<char> pair_ok(static_cast<size_t>(n) * static_cast<size_t>(n), 0);
  const std::uint32_t masks = 1u << flexible.size();
  for (std::uint32_t mask = 0; mask < masks; ++mask) {
    std::vector<std::vector<int>> adj(static_cast<size_t>(n));
    for (int j = 0; j < g.edge_count(); ++j) {
      const Edge& e = g.edge(j);
      adj[static_cast<size_t>(e.tail)].push_back(e.head);
    }
    for (size_t idx = 0; idx < flexible.size(); ++idx) {
      if (mask & (1u << idx)) {
        const Edge& e = g.edge(flexible[idx]);
        // reverse the edge: remove tail->head, add head->tail
        auto& list = adj[static_cast<size_t>(e.tail)];
        list.erase(std::find(list.begin(), list.end(), e.head));
        adj[static_cast<size_t>(e.head)].push_back(e.tail);
      }
    }
    for (int v = 0; v < n; ++v) {
      const std::vector<char> seen = reachable_from(n, adj, v);
      for (int w = 0; w < n; ++w) {
        if (seen[static_cast<size_t>(w)]) {
          pair_ok[static_cast<size_t>(v) * static_cast<size_t>(n) + static_cast<size_t>(w)] = 1;
        }
      }
    }
  }
  for (int v = 0; v < n; ++v) {
    for (int w = 0; w < n; ++w) {
      if (v != w && !pair_ok[static_cast<size_t>(v) * static_cast<size_t>(n) + static_cast<size_t>(w)]) {
        return false;
      }
    }
  }
  return true;
}

std::optional<CycleCover> non_overlapping_cycle_cover(const DirectedGraph& g) {
  if (!is_balanced(g)) return std::nullopt;
  const int m = g.edge_count();
  std::vector<std::vector<int>> out = out_edge_lists(g);
  // per-vertex cursor into the out-edge list; edges are consumed in index order
  for (auto& list : out) std::sort(list.begin(), list.end());
  std::vector<char> used(static_cast<size_t>(m), 0);
  std::vector<size_t> cursor(static_cast<size_t>(g.vertex_count()), 0);

  auto next_unused_out = [&](int v) -> int {
    auto& list = out[static_cast<size_t>(v)];
    size_t& cur = cursor[static_cast<size_t>(v)];
    while (cur < list.size() && used[static_cast<size_t>(list[cur])]) ++cur;
    return cur < list.size() ? list[cur] : -1;
  };

  std::vector<std::vector<int>> cycles;
  for (int e0 = 0; e0 < m; ++e0) {
    if (used[static_cast<size_t>(e0)]) continue;
    // Walk forward from the tail of the lowest unused edge; whenever the walk
    // revisits one of its own vertices, cut the loop out as a simple cycle.
    std::vector<int> walk_vertices{g.edge(e0).tail};
    std::vector<int> walk_edges;
    int cur = g.edge(e0).tail;
    while (true) {
      int e = next_unused_out(cur);
      // Balance guarantees the walk can always continue until it closes.
      assert(e >= 0);
      used[static_cast<size_t>(e)] = 1;
      walk_edges.push_back(e);
      cur = g.edge(e).head;
      auto hit = std::find(walk_vertices.begin(), walk_vertices.end(), cur);
      if (hit != walk_vertices.end()) {
        const size_t p = static_cast<size_t>(hit - walk_vertices.begin());
        cycles.emplace_back(walk_edges.begin() + static_cast<std::ptrdiff_t>(p), walk_edges.end());
        walk_edges.resize(p);
        walk_vertices.resize(p + 1);
        if (walk_edges.empty()) break;
      } else {
        walk_vertices.push_back(cur);
      }
    }
  }

  CycleCover cover;
  cover.cycles = std::move(cycles);
  cover.multiplicity = Eigen::VectorXi::Ones(m);
  cover.non_overlapping = true;
  cover.minimal = false;
  return cover;
}

std::vector<std::vector<int>> enumerate_simple_cycles(const DirectedGraph& g) {
  const int n = g.vertex_count();
  std::vector<std::vector<int>> out = out_edge_lists(g);
  for (auto& list : out) std::sort(list.begin(), list.end());

  std::vector<std::vector<int>> cycles;
  std::vector<char> on_path(static_cast<size_t>(n), 0);
  std::vector<int> path;

  // Anchor each cycle at its smallest vertex so it is reported exactly once.
  for (int s = 0; s < n; ++s) {
    auto dfs = [&](auto&& self, int v) -> void {
      for (int e : out[static_cast<size_t>(v)]) {
        const int w = g.edge(e).head;
        if (w == s) {
          path.push_back(e);
          cycles.push_back(path);
          path.pop_back();
        } else if (w > s && !on_path[static_cast<size_t>(w)]) {
          on_path[static_cast<size_t>(w)] = 1;
          path.push_back(e);
          self(self, w);
          path.pop_back();
          on_path[static_cast<size_t>(w)] = 0;
        }
      }
    };
    on_path[static_cast<size_t>(s)] = 1;
    dfs(dfs, s);
    on_path[static_cast<size_t>(s)] = 0;
  }
  return cycles;
}

namespace {

Eigen::VectorXi multiplicity_of(const std::vector<std::vector<int>>& cycles, int m) {
  Eigen::VectorXi t = Eigen::VectorXi::Zero(m);
  for (const auto& cycle : cycles) {
    for (int e : cycle) ++t[e];
  }
  return t;
}

CycleCover make_cover(std::vector<std::vector<int>> cycles, int m, bool minimal) {
  CycleCover cover;
  cover.multiplicity = multiplicity_of(cycles, m);
  cover.cycles = std::move(cycles);
  cover.non_overlapping =
      m == 0 || (cover.multiplicity.minCoeff() >= 1 && cover.multiplicity.maxCoeff() <= 1);
  cover.minimal = minimal;
  return cover;
}

// Greedy fallback: close each uncovered edge through a shortest return path.
CycleCover greedy_cycle_cover(const DirectedGraph& g) {
  const int m = g.edge_count();
  std::vector<std::vector<int>> out = out_edge_lists(g);
  for (auto& list : out) std::sort(list.begin(), list.end());
  std::vector<char> covered(static_cast<size_t>(m), 0);
  std::vector<std::vector<int>> cycles;
  for (int e0 = 0; e0 < m; ++e0) {
    if (covered[static_cast<size_t>(e0)]) continue;
    const int from = g.edge(e0).head;
    const int to = g.edge(e0).tail;
    // BFS over edges, lowest edge index first.
    std::vector<int> via_edge(static_cast<size_t>(g.vertex_count()), -1);
    std::vector<char> seen(static_cast<size_t>(g.vertex_count()), 0);
    std::deque<int> queue{from};
    seen[static_cast<size_t>(from)] = 1;
    while (!queue.empty() && !seen[static_cast<size_t>(to)]) {
      int v = queue.front();
      queue.pop_front();
      for (int e : out[static_cast<size_t>(v)]) {
        const int w = g.edge(e).head;
        if (!seen[static_cast<size_t>(w)]) {
          seen[static_cast<size_t>(w)] = 1;
          via_edge[static_cast<size_t>(w)] = e;
          queue.push_back(w);
        }
      }
    }
    std::vector<int> cycle;
    for (int v = to; v != from; v = g.edge(via_edge[static_cast<size_t>(v)]).tail) {
      cycle.push_back(via_edge[static_cast<size_t>(v)]);
    }
    std::reverse(cycle.begin(), cycle.end());
    cycle.insert(cycle.begin(), e0);
    for (int e : cycle) covered[static_cast<size_t>(e)] = 1;
    cycles.push_back(std::move(cycle));
  }
  return make_cover(std::move(cycles), m, false);
}

struct CoverSearch {
  std::vector<std::uint32_t> cycle_masks;
  std::uint32_t full = 0;
  int best = 0;
  bool collect_all = false;
  int cap = 1;
  std::vector<std::vector<int>> solutions;  // cycle-id lists
  std::set<std::vector<int>> seen;

  void run(std::uint32_t covered, std::vector<int>& chosen) {
    if (covered == full) {
      if (static_cast<int>(chosen.size()) < best) {
        best = static_cast<int>(chosen.size());
        solutions.clear();
        seen.clear();
      }
      if (static_cast<int>(chosen.size()) == best &&
          (collect_all ? static_cast<int>(solutions.size()) < cap : solutions.empty())) {
        std::vector<int> key = chosen;
        std::sort(key.begin(), key.end());
        if (seen.insert(key).second) solutions.push_back(chosen);
      }
      return;
    }
    if (static_cast<int>(chosen.size()) + 1 > best) return;
    // branch on the lowest uncovered edge
    int edge = 0;
    while (covered & (1u << edge)) ++edge;
    for (size_t id = 0; id < cycle_masks.size(); ++id) {
      if (cycle_masks[id] & (1u << edge)) {
        chosen.push_back(static_cast<int>(id));
        run(covered | cycle_masks[id], chosen);
        chosen.pop_back();
      }
    }
  }
};

std::vector<CycleCover> exact_minimal_covers(const DirectedGraph& g, bool collect_all, int cap) {
  const int m = g.edge_count();
  const std::vector<std::vector<int>> cycles = enumerate_simple_cycles(g);

  CoverSearch search;
  search.full = (1u << m) - 1u;  // callers cap m at 16
  search.cycle_masks.reserve(cycles.size());
  for (const auto& cycle : cycles) {
    std::uint32_t mask = 0;
    for (int e : cycle) mask |= 1u << e;
    search.cycle_masks.push_back(mask);
  }
  search.best = static_cast<int>(cycles.size()) + 1;
  search.collect_all = collect_all;
  search.cap = cap;
  std::vector<int> chosen;
  search.run(0, chosen);

  std::vector<CycleCover> covers;
  for (const auto& ids : search.solutions) {
    std::vector<std::vector<int>> chosen_cycles;
    chosen_cycles.reserve(ids.size());
    for (int id : ids) chosen_cycles.push_back(cycles[static_cast<size_t>(id)]);
    covers.push_back(make_cover(std::move(chosen_cycles), m, true));
  }
  return covers;
}

}  // namespace

CycleCover minimal_cycle_cover(const DirectedGraph& g) {
  if (!is_strongly_connected(g)) {
    throw std::invalid_argument("minimal_cycle_cover: graph must be strongly connected");
  }
  const int m = g.edge_count();
  if (m == 0) return make_cover({}, 0, true);
  if (m > 16) return greedy_cycle_cover(g);
  std::vector<CycleCover> covers = exact_minimal_covers(g, false, 1);
  assert(!covers.empty());
  return std::move(covers.front());
}

std::vector<CycleCover> all_minimal_cycle_covers(const DirectedGraph& g, int cap) {
  if (!is_strongly_connected(g)) {
    throw std::invalid_argument("all_minimal_cycle_covers: graph must be strongly connected");
  }
  if (g.edge_count() > 16) {
    throw std::invalid_argument("all_minimal_cycle_covers: exact solver handles at most 16 edges");
  }
  if (g.edge_count() == 0) return {make_cover({}, 0, true)};
  return exact_minimal_covers(g, true, cap);
}

}  // namespace flownet
