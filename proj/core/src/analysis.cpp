#include "flownet/analysis.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <deque>
#include <stdexcept>

#include "flownet/linprog.hpp"

namespace flownet {

namespace {

double inf_norm(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

// Signed fundamental-cycle basis of ker B from a spanning forest: one basis
// vector per chord, with integer entries, so the kernel is exact.
Eigen::MatrixXd cycle_space_basis(const DirectedGraph& g) {
  const int n = g.vertex_count();
  const int m = g.edge_count();
  std::vector<int> parent_vertex(static_cast<size_t>(n), -1);
  std::vector<int> parent_edge(static_cast<size_t>(n), -1);
  std::vector<char> in_tree_edge(static_cast<size_t>(m), 0);
  std::vector<char> visited(static_cast<size_t>(n), 0);

  std::vector<std::vector<std::pair<int, int>>> adj(static_cast<size_t>(n));  // (neighbor, edge)
  for (int j = 0; j < m; ++j) {
    adj[static_cast<size_t>(g.edge(j).tail)].emplace_back(g.edge(j).head, j);
    adj[static_cast<size_t>(g.edge(j).head)].emplace_back(g.edge(j).tail, j);
  }
  for (int root = 0; root < n; ++root) {
    if (visited[static_cast<size_t>(root)]) continue;
    visited[static_cast<size_t>(root)] = 1;
    std::deque<int> queue{root};
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (const auto& [w, e] : adj[static_cast<size_t>(v)]) {
        if (!visited[static_cast<size_t>(w)]) {
          visited[static_cast<size_t>(w)] = 1;
          parent_vertex[static_cast<size_t>(w)] = v;
          parent_edge[static_cast<size_t>(w)] = e;
          in_tree_edge[static_cast<size_t>(e)] = 1;
          queue.push_back(w);
        }
      }
    }
  }

  auto tree_path_coefficients = [&](int from, int to, Eigen::VectorXd& coeff, double sign) {
    // walk both endpoints up to their lowest common ancestor
    auto depth_of = [&](int v) {
      int d = 0;
      while (parent_vertex[static_cast<size_t>(v)] >= 0) {
        v = parent_vertex[static_cast<size_t>(v)];
        ++d;
      }
      return d;
    };
    int a = from;
    int b = to;
    int da = depth_of(a);
    int db = depth_of(b);
    auto step_up = [&](int v, double dir) {
      const int e = parent_edge[static_cast<size_t>(v)];
      const int p = parent_vertex[static_cast<size_t>(v)];
      // traversing from v to parent p: +1 if the edge points v -> p
      coeff[e] += dir * (g.edge(e).tail == v ? 1.0 : -1.0);
      return p;
    };
    while (da > db) {
      a = step_up(a, sign);
      --da;
    }
    while (db > da) {
      b = step_up(b, -sign);
      --db;
    }
    while (a != b) {
      a = step_up(a, sign);
      b = step_up(b, -sign);
    }
  };

  std::vector<int> chords;
  for (int j = 0; j < m; ++j) {
    if (!in_tree_edge[static_cast<size_t>(j)]) chords.push_back(j);
  }
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(m, static_cast<int>(chords.size()));
  for (size_t k = 0; k < chords.size(); ++k) {
    const int j = chords[k];
    Eigen::VectorXd coeff = Eigen::VectorXd::Zero(m);
    coeff[j] = 1.0;
    // close the chord through the tree: path head -> tail
    tree_path_coefficients(g.edge(j).head, g.edge(j).tail, coeff, 1.0);
    basis.col(static_cast<int>(k)) = coeff;
  }
  return basis;
}

}  // namespace

bool PermissionSet::contains(const Eigen::VectorXd& x, double margin) const {
  if (x.size() != lo.size()) return false;
  for (int i = 0; i < x.size(); ++i) {
    if (!(x[i] - lo[i] > margin && hi[i] - x[i] > margin)) return false;
  }
  return true;
}

PermissionSet permission_set(const FlowConstraints& c) {
  if (!c.is_canonical()) {
    throw std::invalid_argument("permission_set: canonical constraints required");
  }
  const int m = c.size();
  double upper_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    if (c.is_unidirectional(i)) upper_min = std::min(upper_min, c.upper[i]);
  }
  PermissionSet p;
  p.lo = Eigen::VectorXd::Zero(m);
  p.hi = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < m; ++i) {
    if (c.is_bidirectional(i)) {
      const double s = std::min(-c.lower[i], c.upper[i]);
      p.lo[i] = -s;
      p.hi[i] = s;
    } else {
      p.lo[i] = 0.0;
      p.hi[i] = upper_min;
    }
  }
  return p;
}

MatchingResult solve_matching_injection(const DirectedGraph& g, const Eigen::VectorXd& injection) {
  const Eigen::MatrixXd b = g.incidence_matrix();
  MatchingResult result;
  if (g.edge_count() == 0) {
    result.x_c_bar = Eigen::VectorXd::Zero(0);
    result.residual = injection.norm();
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    const Eigen::VectorXd x = svd.solve(injection);
    result.x_c_bar = x;
    result.residual = (b * x - injection).norm();
  }
  result.feasible = result.residual <= 1e-10 * (1.0 + injection.norm());
  if (!result.feasible) result.x_c_bar.reset();
  return result;
}

MatchingResult solve_matching(const DirectedGraph& g, const DisturbanceModel& dist) {
  dist.validate(g.vertex_count());
  return solve_matching_injection(g, dist.net_injection());
}

MatchingResult solve_matching(const DirectedGraph& g, const DisturbanceModel& dist,
                              const PermissionSet& pset) {
  MatchingResult result = solve_matching(g, dist);
  if (result.x_c_bar) result.in_permission_set = pset.contains(*result.x_c_bar);
  return result;
}

std::optional<Eigen::VectorXd> adjust_into_permission_set(const DirectedGraph& g,
                                                          const DisturbanceModel& dist,
                                                          const PermissionSet& pset) {
  const MatchingResult matching = solve_matching(g, dist);
  if (!matching.feasible) {
    throw std::invalid_argument("adjust_into_permission_set: matching is infeasible");
  }
  const Eigen::VectorXd& base = *matching.x_c_bar;
  const int m = g.edge_count();
  if (pset.lo.size() != m) {
    throw std::invalid_argument("adjust_into_permission_set: permission set size mismatch");
  }
  constexpr double kMargin = 1e-12;
  if (m == 0) return Eigen::VectorXd::Zero(0);

  const Eigen::MatrixXd basis = cycle_space_basis(g);
  const int q = static_cast<int>(basis.cols());

  // maximize t subject to lo + t <= base + basis z <= hi - t
  Eigen::MatrixXd a(2 * m, q + 1);
  Eigen::VectorXd rhs(2 * m);
  for (int i = 0; i < m; ++i) {
    a.row(i).head(q) = basis.row(i);
    a(i, q) = 1.0;
    rhs[i] = pset.hi[i] - base[i];
    a.row(m + i).head(q) = -basis.row(i);
    a(m + i, q) = 1.0;
    rhs[m + i] = base[i] - pset.lo[i];
  }
  Eigen::VectorXd objective = Eigen::VectorXd::Zero(q + 1);
  objective[q] = 1.0;

  const LpResult lp = solve_lp_max(a, rhs, objective);
  if (lp.status != LpResult::Status::Optimal || lp.objective <= kMargin) return std::nullopt;
  return base + basis * lp.solution.head(q);
}

double lyapunov_pi(const Hamiltonian& h, const Eigen::VectorXd& x, const Eigen::VectorXd& xc,
                   const Eigen::VectorXd& xc_bar) {
  return h.value(x) + 0.5 * (xc - xc_bar).squaredNorm();
}

namespace {

struct ShiftedBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::VectorXd xc_shift;
};

ShiftedBounds shifted_bounds(const FlowConstraints& c,
                             const std::optional<Eigen::VectorXd>& xc_bar, int m) {
  if (!xc_bar) {
    return ShiftedBounds{c.lower, c.upper, Eigen::VectorXd::Zero(m)};
  }
  return ShiftedBounds{c.lower + *xc_bar, c.upper + *xc_bar, *xc_bar};
}

}  // namespace

double lyapunov_saturated(const DirectedGraph& g, const Hamiltonian& h, const FlowConstraints& c,
                          const Eigen::VectorXd& x, const Eigen::VectorXd& xc,
                          const std::optional<Eigen::VectorXd>& xc_bar) {
  const ShiftedBounds sb = shifted_bounds(c, xc_bar, g.edge_count());
  const Eigen::VectorXd w = -(g.incidence_matrix().transpose() * h.gradient(x)) - (xc - sb.xc_shift);
  return saturation_integral(w, sb.lower, sb.upper).sum() + h.value(x);
}

Eigen::VectorXd lyapunov_saturated_gradient(const DirectedGraph& g, const Hamiltonian& h,
                                            const FlowConstraints& c, const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& xc,
                                            const std::optional<Eigen::VectorXd>& xc_bar) {
  const ShiftedBounds sb = shifted_bounds(c, xc_bar, g.edge_count());
  const Eigen::MatrixXd b = g.incidence_matrix();
  const Eigen::VectorXd w = -(b.transpose() * h.gradient(x)) - (xc - sb.xc_shift);
  const Eigen::VectorXd clamp = saturate(w, sb.lower, sb.upper);
  Eigen::VectorXd grad(x.size() + xc.size());
  grad.head(x.size()) = h.gradient(x) - h.hessian_diagonal().asDiagonal() * (b * clamp);
  grad.tail(xc.size()) = -clamp;
  return grad;
}

ConsensusCheck consensus_check(const Hamiltonian& h, const Eigen::VectorXd& x, double tol) {
  const Eigen::VectorXd grad = h.gradient(x);
  ConsensusCheck check;
  check.alpha = grad.size() == 0 ? 0.0 : grad.mean();
  check.consensus = inf_norm((grad.array() - check.alpha).matrix()) < tol;
  return check;
}

EquilibriumClass classify_equilibrium(const Scenario& s, const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& xc) {
  constexpr double kTol = 1e-8;
  const Eigen::MatrixXd b = s.graph.incidence_matrix();
  const FlowRates rates = scenario_rhs(s, b, x, xc);
  EquilibriumClass result;
  result.is_equilibrium = inf_norm(rates.x_dot) < kTol;
  result.gradient_aligned = inf_norm(b.transpose() * s.hamiltonian.gradient(x)) < kTol;
  return result;
}

ConvergenceVerdict predict_convergence(const Scenario& s) {
  const bool weakly = is_weakly_connected(s.graph);

  if (s.controller.kind == ControllerSpec::Kind::Proportional) {
    if (s.has_injection()) {
      return {false, "proportional control cannot reject constant in/outflows"};
    }
    return weakly ? ConvergenceVerdict{true, "weakly connected"}
                  : ConvergenceVerdict{false, "not weakly connected"};
  }

  if (s.controller.kind == ControllerSpec::Kind::PI) {
    if (s.disturbance) {
      const MatchingResult matching = solve_matching(s.graph, *s.disturbance);
      if (!matching.feasible) return {false, "matching infeasible"};
    }
    return weakly ? ConvergenceVerdict{true, "weakly connected"}
                  : ConvergenceVerdict{false, "not weakly connected"};
  }

  // Saturated PI.
  const FlowConstraints& c = *s.constraints;
  if (!s.has_injection()) {
    return strongly_connected_wrt_constraints(s.graph, c)
               ? ConvergenceVerdict{true, "strongly connected with respect to the flow constraints"}
               : ConvergenceVerdict{false,
                                    "not strongly connected with respect to the flow constraints"};
  }

  bool any_uni = false;
  bool any_bi = false;
  for (int i = 0; i < c.size(); ++i) {
    (c.is_bidirectional(i) ? any_bi : any_uni) = true;
  }
  if (any_uni && any_bi) {
    return {std::nullopt, "mixed uni-/bidirectional constraints with nonzero in/outflows"};
  }

  const MatchingResult matching = solve_matching(s.graph, *s.disturbance);
  if (!matching.feasible) return {false, "matching infeasible"};
  const PermissionSet pset = permission_set(c);
  const std::optional<Eigen::VectorXd> inside =
      adjust_into_permission_set(s.graph, *s.disturbance, pset);
  if (!inside) return {false, "no matched controller state inside the permission set"};

  if (any_bi) {
    return weakly ? ConvergenceVerdict{true, "weakly connected"}
                  : ConvergenceVerdict{false, "not weakly connected"};
  }
  if (!is_strongly_connected(s.graph)) return {false, "not strongly connected"};
  if (!is_balanced(s.graph)) return {false, "unbalanced"};
  return {true, "strongly connected and balanced"};
}

std::optional<std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>> lyapunov_for(
    const Scenario& s) {
  using Fn = std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

  if (s.controller.kind == ControllerSpec::Kind::Proportional) {
    if (s.has_injection()) return std::nullopt;
    const Hamiltonian h = s.hamiltonian;
    return Fn([h](const Eigen::VectorXd& x, const Eigen::VectorXd&) { return h.value(x); });
  }

  if (s.controller.kind == ControllerSpec::Kind::PI) {
    Eigen::VectorXd xc_bar = Eigen::VectorXd::Zero(s.graph.edge_count());
    if (s.disturbance) {
      const MatchingResult matching = solve_matching(s.graph, *s.disturbance);
      if (!matching.feasible) return std::nullopt;
      xc_bar = *matching.x_c_bar;
    }
    const Hamiltonian h = s.hamiltonian;
    return Fn([h, xc_bar](const Eigen::VectorXd& x, const Eigen::VectorXd& xc) {
      return lyapunov_pi(h, x, xc, xc_bar);
    });
  }

  std::optional<Eigen::VectorXd> xc_bar;
  if (s.has_injection()) {
    const MatchingResult matching = solve_matching(s.graph, *s.disturbance);
    if (!matching.feasible) return std::nullopt;
    xc_bar = matching.x_c_bar;
  }
  const DirectedGraph g = s.graph;
  const Hamiltonian h = s.hamiltonian;
  const FlowConstraints c = *s.constraints;
  return Fn([g, h, c, xc_bar](const Eigen::VectorXd& x, const Eigen::VectorXd& xc) {
    return lyapunov_saturated(g, h, c, x, xc, xc_bar);
  });
}

}  // namespace flownet
