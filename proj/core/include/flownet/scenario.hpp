#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "flownet/dynamics.hpp"
#include "flownet/graph.hpp"
#include "flownet/integrator.hpp"

namespace flownet {

/// Everything one run needs: network, constraints, energy function,
/// controller, disturbance, initial data and integrator parameters.
/// Scenarios are stored in canonical orientation (constraint lower bounds
/// <= 0 < upper bounds); loading flips offending edges, mirrors their
/// intervals and negates the matching controller states.
struct Scenario {
  std::string name;
  std::string notes;
  DirectedGraph graph;
  std::optional<FlowConstraints> constraints;
  Hamiltonian hamiltonian;
  ControllerSpec controller;
  std::optional<DisturbanceModel> disturbance;
  Eigen::VectorXd x0;
  Eigen::VectorXd xc0;
  IntegratorParams integrator;

  Eigen::VectorXd net_injection() const;
  bool has_injection() const;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Closed-loop right-hand side selected by the scenario's controller.
FlowRates scenario_rhs(const Scenario& s, const Eigen::MatrixXd& incidence,
                       const Eigen::VectorXd& x, const Eigen::VectorXd& xc);

/// Applies canonicalize_orientation to the scenario in place; flipped edges
/// negate the corresponding entries of xc0. Returns the flip mask.
std::vector<bool> canonicalize_scenario(Scenario& s);

/// Five-vertex, seven-edge strongly connected unbalanced network with unit
/// unidirectional flow constraints and a matched constant disturbance; its
/// run settles into a steady state that never reaches consensus.
Scenario unbalanced_five_vertex();

/// A counterexample scenario plus the construction data behind it.
struct Counterexample {
  Scenario scenario;
  Eigen::VectorXd x_c_bar;     // matched controller state, strictly inside (0,1)^m
  double lambda = 0.0;         // common flow multiplier
  Eigen::VectorXi multiplicity;  // cycle-cover multiplicities T
};

/// For a strongly connected unbalanced graph, builds a scenario with unit
/// flow intervals whose trajectory is pinned at a non-consensus equilibrium
/// with flows lambda * T (in disturbance-shifted coordinates). Returns
/// nullopt for balanced graphs; refuses covers that are not certified
/// minimal (more than 16 edges).
std::optional<Counterexample> build_counterexample(const DirectedGraph& g);

Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

Scenario scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const Scenario& s);

/// Graph-only JSON fragment {"n": ..., "edges": [[tail, head], ...]}.
DirectedGraph load_graph(const std::filesystem::path& path);

}  // namespace flownet
