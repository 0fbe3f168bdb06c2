#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace flownet {

struct Edge {
  int tail = 0;
  int head = 0;
};

/// Directed graph given by a vertex count and an ordered edge list.
/// Self-loops are rejected; parallel edges are allowed. Instances are
/// immutable after construction and safe to share across threads.
class DirectedGraph {
 public:
  DirectedGraph(int vertex_count, std::vector<Edge> edges);

  int vertex_count() const { return n_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int j) const { return edges_[static_cast<size_t>(j)]; }

  /// n x m matrix with +1 at the head and -1 at the tail of every column.
  Eigen::MatrixXd incidence_matrix() const;

  std::vector<int> out_degrees() const;
  std::vector<int> in_degrees() const;

  /// Copy with the selected edges reversed.
  DirectedGraph with_flipped_edges(const std::vector<bool>& flip) const;

 private:
  int n_;
  std::vector<Edge> edges_;
};

/// Per-edge closed flow intervals [lower, upper]. Valid constraints have
/// lower <= 0 <= upper and lower < upper on every edge; after
/// canonicalize_orientation they satisfy lower <= 0 < upper.
struct FlowConstraints {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int size() const { return static_cast<int>(lower.size()); }
  bool is_bidirectional(int i) const { return lower[i] < 0.0; }
  bool is_unidirectional(int i) const { return lower[i] == 0.0; }
  bool is_canonical() const;

  /// Throws std::invalid_argument unless lower <= 0 <= upper, lower < upper.
  void validate(int edge_count) const;
};

struct CanonicalForm {
  DirectedGraph graph;
  FlowConstraints constraints;
  std::vector<bool> flipped;
};

/// Reverses every edge whose upper bound is zero and mirrors its interval
/// ([l, 0] becomes [0, -l]), so all intervals end up with lower <= 0 < upper.
/// Idempotent; the flip mask records which columns changed sign.
CanonicalForm canonicalize_orientation(const DirectedGraph& g, const FlowConstraints& c);

bool is_weakly_connected(const DirectedGraph& g);
bool is_strongly_connected(const DirectedGraph& g);
bool is_balanced(const DirectedGraph& g);

/// Component id per vertex (ids are contiguous, order of first appearance).
std::vector<int> weak_components(const DirectedGraph& g);
int weak_component_count(const DirectedGraph& g);

/// True iff every ordered vertex pair is joined by a directed path in the
/// auxiliary digraph that keeps every edge forward and adds the reverse arc
/// for bidirectional edges. Expects canonical constraints.
bool strongly_connected_wrt_constraints(const DirectedGraph& g, const FlowConstraints& c);

/// Reference implementation that enumerates all 2^k reorientations of the
/// bidirectional edges per vertex pair. Requires at most 20 such edges.
bool brute_force_scc_wrt_constraints(const DirectedGraph& g, const FlowConstraints& c);

/// A set of directed cycles (edge-index sequences, traversed forward)
/// covering the edge set. multiplicity[i] counts the cycles through edge i.
struct CycleCover {
  std::vector<std::vector<int>> cycles;
  Eigen::VectorXi multiplicity;
  bool non_overlapping = false;
  bool minimal = false;  // set only when the exact solver certified the count
};

/// Edge-disjoint cycle decomposition of a balanced graph, extracted by
/// walking lowest-index unused out-edges and cutting loops as they close.
/// Returns nullopt iff the graph is unbalanced.
std::optional<CycleCover> non_overlapping_cycle_cover(const DirectedGraph& g);

/// Smallest set of simple directed cycles covering all edges. Exact
/// (branch-and-bound over the enumerated simple cycles) for m <= 16,
/// greedy with minimal = false beyond that. Requires strong connectivity.
CycleCover minimal_cycle_cover(const DirectedGraph& g);

/// Every minimum-cardinality cover, up to `cap` of them (exact solver only).
std::vector<CycleCover> all_minimal_cycle_covers(const DirectedGraph& g, int cap);

/// All simple directed cycles, each reported once as an edge-index sequence
/// starting at its smallest vertex.
std::vector<std::vector<int>> enumerate_simple_cycles(const DirectedGraph& g);

}  // namespace flownet
