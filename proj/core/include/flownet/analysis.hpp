#pragma once

#include <functional>
#include <optional>
#include <string>

#include "flownet/dynamics.hpp"
#include "flownet/graph.hpp"
#include "flownet/scenario.hpp"

namespace flownet {

/// Per-edge open intervals of matched controller states that still let the
/// saturated loop balance. Bidirectional edges get the symmetric interval
/// (-s, s) with s = min(|lower|, upper); unidirectional edges share
/// (0, min upper) over all unidirectional edges.
struct PermissionSet {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  bool contains(const Eigen::VectorXd& x, double margin = 1e-12) const;
};

/// Requires canonical constraints.
PermissionSet permission_set(const FlowConstraints& c);

struct MatchingResult {
  std::optional<Eigen::VectorXd> x_c_bar;  // minimum-norm representative
  double residual = 0.0;                   // ||B x_c_bar - E d||_2
  bool feasible = false;
  std::optional<bool> in_permission_set;   // set when a permission set was supplied
};

/// Minimum-norm least-squares solution of B x_c = E d (rank threshold 1e-10
/// relative to the largest singular value). Feasible iff the residual is
/// below 1e-10 * (1 + ||E d||).
MatchingResult solve_matching(const DirectedGraph& g, const DisturbanceModel& dist);
MatchingResult solve_matching(const DirectedGraph& g, const DisturbanceModel& dist,
                              const PermissionSet& pset);
MatchingResult solve_matching_injection(const DirectedGraph& g, const Eigen::VectorXd& injection);

/// Searches the affine solution set of the matching equation for a point
/// strictly inside the permission set by maximizing the minimum slack over
/// the cycle-space coordinates. Returns nullopt when the intersection is
/// empty. Precondition: matching is feasible.
std::optional<Eigen::VectorXd> adjust_into_permission_set(const DirectedGraph& g,
                                                          const DisturbanceModel& dist,
                                                          const PermissionSet& pset);

/// H(x) + ||xc - xc_bar||^2 / 2.
double lyapunov_pi(const Hamiltonian& h, const Eigen::VectorXd& x, const Eigen::VectorXd& xc,
                   const Eigen::VectorXd& xc_bar);

/// Sum of the saturation antiderivative of -B^T dH/dx - (xc - xc_bar) over
/// the disturbance-shifted bounds, plus H(x). Pass xc_bar only when it
/// satisfies the matching equation; omit it for zero injection.
double lyapunov_saturated(const DirectedGraph& g, const Hamiltonian& h, const FlowConstraints& c,
                          const Eigen::VectorXd& x, const Eigen::VectorXd& xc,
                          const std::optional<Eigen::VectorXd>& xc_bar = std::nullopt);

/// Analytic gradient of lyapunov_saturated with respect to (x, xc), stacked.
Eigen::VectorXd lyapunov_saturated_gradient(const DirectedGraph& g, const Hamiltonian& h,
                                            const FlowConstraints& c, const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& xc,
                                            const std::optional<Eigen::VectorXd>& xc_bar = std::nullopt);

struct ConsensusCheck {
  bool consensus = false;
  double alpha = 0.0;  // mean of the energy gradient
};

/// True when every component of dH/dx lies within tol of their mean.
ConsensusCheck consensus_check(const Hamiltonian& h, const Eigen::VectorXd& x, double tol);

struct EquilibriumClass {
  bool is_equilibrium = false;
  bool gradient_aligned = false;  // B^T dH/dx = 0
};

/// Evaluates the scenario right-hand side at (x, xc); both predicates use an
/// absolute 1e-8 threshold on the infinity norm.
EquilibriumClass classify_equilibrium(const Scenario& s, const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& xc);

struct ConvergenceVerdict {
  std::optional<bool> consensus_expected;  // nullopt: outside the covered theory
  std::string reason;
};

/// Dispatches the scenario to the convergence condition that covers it:
/// unconstrained PI needs weak connectivity and a feasible matching; the
/// constrained loop with zero injection needs strong connectivity with
/// respect to the constraints; with nonzero injection, all-bidirectional
/// needs weak connectivity and all-unidirectional needs strong connectivity
/// plus balance, both with a matched state inside the permission set. Mixed
/// uni/bidirectional edges with nonzero injection are outside the theory.
ConvergenceVerdict predict_convergence(const Scenario& s);

/// The Lyapunov function certifying the scenario's convergence, when one
/// applies: H for damped proportional control without injection, the shifted
/// quadratic for PI with feasible matching, the saturation antiderivative
/// form for the constrained loop.
std::optional<std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>> lyapunov_for(
    const Scenario& s);

}  // namespace flownet
