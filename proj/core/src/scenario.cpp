#include "flownet/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "flownet/linprog.hpp"

namespace flownet {

using nlohmann::json;

void IntegratorParams::validate() const {
  if (!(step > 0.0)) throw std::invalid_argument("integrator.step: must be positive");
  if (!(horizon >= 0.0)) throw std::invalid_argument("integrator.horizon: must be nonnegative");
  if (stride < 1) throw std::invalid_argument("integrator.stride: must be at least 1");
  if (tol_rate && !(*tol_rate > 0.0)) {
    throw std::invalid_argument("integrator.tol_rate: must be positive");
  }
  if (tol_consensus && !(*tol_consensus > 0.0)) {
    throw std::invalid_argument("integrator.tol_consensus: must be positive");
  }
}

Eigen::VectorXd Scenario::net_injection() const {
  if (!disturbance) return Eigen::VectorXd::Zero(graph.vertex_count());
  return disturbance->net_injection();
}

bool Scenario::has_injection() const {
  const Eigen::VectorXd inj = net_injection();
  for (int i = 0; i < inj.size(); ++i) {
    if (inj[i] != 0.0) return true;
  }
  return false;
}

void Scenario::validate() const {
  const int n = graph.vertex_count();
  const int m = graph.edge_count();
  if (hamiltonian.dim() != n) {
    throw std::invalid_argument("hamiltonian: dimension must match vertex count");
  }
  controller.validate(m);
  if (controller.kind == ControllerSpec::Kind::SaturatedPI) {
    if (!constraints) throw std::invalid_argument("constraints: required for PI_sat controller");
  } else if (constraints) {
    throw std::invalid_argument("constraints: only meaningful with the PI_sat controller");
  }
  if (constraints) {
    constraints->validate(m);
    if (!constraints->is_canonical()) {
      throw std::invalid_argument("constraints: canonical orientation required (lower <= 0 < upper)");
    }
  }
  if (disturbance) disturbance->validate(n);
  if (x0.size() != n) throw std::invalid_argument("x0: one entry per vertex required");
  const int expected_xc = controller.has_edge_state() ? m : 0;
  if (xc0.size() != expected_xc) {
    throw std::invalid_argument(controller.has_edge_state()
                                    ? "xc0: one entry per edge required"
                                    : "xc0: must be empty for proportional control");
  }
  integrator.validate();
}

FlowRates scenario_rhs(const Scenario& s, const Eigen::MatrixXd& incidence,
                       const Eigen::VectorXd& x, const Eigen::VectorXd& xc) {
  const Eigen::VectorXd injection = s.net_injection();
  switch (s.controller.kind) {
    case ControllerSpec::Kind::Proportional:
      return rhs_proportional(incidence, s.hamiltonian, s.controller.gains, x, injection);
    case ControllerSpec::Kind::PI:
      return rhs_pi(incidence, s.hamiltonian, s.controller.gains, x, xc, injection);
    case ControllerSpec::Kind::SaturatedPI:
      return rhs_pi_saturated(incidence, s.hamiltonian, *s.constraints, x, xc, injection);
  }
  throw std::logic_error("unknown controller kind");
}

std::vector<bool> canonicalize_scenario(Scenario& s) {
  if (!s.constraints) return std::vector<bool>(static_cast<size_t>(s.graph.edge_count()), false);
  CanonicalForm canon = canonicalize_orientation(s.graph, *s.constraints);
  for (int j = 0; j < s.graph.edge_count(); ++j) {
    if (canon.flipped[static_cast<size_t>(j)] && j < s.xc0.size()) s.xc0[j] = -s.xc0[j];
  }
  s.graph = std::move(canon.graph);
  s.constraints = std::move(canon.constraints);
  return std::move(canon.flipped);
}

namespace {

// Terminal columns for a prescribed net injection: one signed unit column
// per vertex with a nonzero entry, rates carrying the magnitudes.
DisturbanceModel terminals_for_injection(const Eigen::VectorXd& injection) {
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

}  // namespace

Scenario unbalanced_five_vertex() {
  DirectedGraph graph(5, {{0, 1}, {1, 2}, {2, 0}, {0, 3}, {3, 2}, {0, 4}, {4, 1}});
  const int m = graph.edge_count();

  FlowConstraints constraints;
  constraints.lower = Eigen::VectorXd::Zero(m);
  constraints.upper = Eigen::VectorXd::Ones(m);

  const Eigen::VectorXd x_c_bar = Eigen::VectorXd::Constant(m, 0.5);
  const Eigen::VectorXd injection = graph.incidence_matrix() * x_c_bar;

  Eigen::VectorXd xc_tilde0(m);
  xc_tilde0 << 1, -1, -1, 1, 1, 1, 1;

  Eigen::VectorXd x0(5);
  x0 << 3, 7, 5, 1, 4;

  Scenario s{
      .name = "unbalanced-five-vertex",
      .notes = "",
      .graph = std::move(graph),
      .constraints = std::move(constraints),
      .hamiltonian = Hamiltonian::quadratic(5),
      .controller = ControllerSpec{ControllerSpec::Kind::SaturatedPI, Eigen::VectorXd()},
      .disturbance = terminals_for_injection(injection),
      .x0 = std::move(x0),
      .xc0 = xc_tilde0 + x_c_bar,
      .integrator = IntegratorParams{},
  };
  s.validate();
  return s;
}

namespace {

enum class EdgeClass { UpperPinned, LowerPinned, Interior };

// Vertex potentials realizing strict drops across upper-pinned edges, strict
// rises across lower-pinned edges and equality elsewhere; unit gaps via
// longest-path levels on the condensed order. Returns nullopt when the
// required order is contradictory for this cover.
std::optional<Eigen::VectorXd> solve_vertex_order(const DirectedGraph& g,
                                                  const std::vector<EdgeClass>& edge_class) {
  const int n = g.vertex_count();
  std::vector<int> parent(static_cast<size_t>(n));
  for (int v = 0; v < n; ++v) parent[static_cast<size_t>(v)] = v;
  auto find = [&](int v) {
    while (parent[static_cast<size_t>(v)] != v) {
      parent[static_cast<size_t>(v)] = parent[static_cast<size_t>(parent[static_cast<size_t>(v)])];
      v = parent[static_cast<size_t>(v)];
    }
    return v;
  };
  for (int j = 0; j < g.edge_count(); ++j) {
    if (edge_class[static_cast<size_t>(j)] == EdgeClass::Interior) {
      parent[static_cast<size_t>(find(g.edge(j).tail))] = find(g.edge(j).head);
    }
  }

  // strict arcs lo -> hi meaning level(lo) < level(hi)
  std::vector<std::pair<int, int>> arcs;
  for (int j = 0; j < g.edge_count(); ++j) {
    const Edge& e = g.edge(j);
    switch (edge_class[static_cast<size_t>(j)]) {
      case EdgeClass::UpperPinned:
        arcs.emplace_back(find(e.head), find(e.tail));
        break;
      case EdgeClass::LowerPinned:
        arcs.emplace_back(find(e.tail), find(e.head));
        break;
      case EdgeClass::Interior:
        break;
    }
  }
  for (const auto& [lo, hi] : arcs) {
    if (lo == hi) return std::nullopt;
  }

  // Kahn topological pass with longest-path levels.
  std::vector<std::vector<int>> succ(static_cast<size_t>(n));
  std::vector<int> indeg(static_cast<size_t>(n), 0);
  for (const auto& [lo, hi] : arcs) {
    succ[static_cast<size_t>(lo)].push_back(hi);
    ++indeg[static_cast<size_t>(hi)];
  }
  std::vector<int> level(static_cast<size_t>(n), 0);
  std::deque<int> ready;
  int processed = 0;
  int roots = 0;
  for (int v = 0; v < n; ++v) {
    if (find(v) == v) {
      ++roots;
      if (indeg[static_cast<size_t>(v)] == 0) ready.push_back(v);
    }
  }
  while (!ready.empty()) {
    const int v = ready.front();
    ready.pop_front();
    ++processed;
    for (int w : succ[static_cast<size_t>(v)]) {
      level[static_cast<size_t>(w)] =
          std::max(level[static_cast<size_t>(w)], level[static_cast<size_t>(v)] + 1);
      if (--indeg[static_cast<size_t>(w)] == 0) ready.push_back(w);
    }
  }
  if (processed != roots) return std::nullopt;  // cyclic order

  Eigen::VectorXd potentials(n);
  for (int v = 0; v < n; ++v) potentials[v] = static_cast<double>(level[static_cast<size_t>(find(v))]);
  return potentials;
}

// Searches edge classifications compatible with the pinned-flow values
// lambda * T: an edge may pin at its upper bound when lambda * T_e lies in
// (1, 2), at its lower bound when it lies in (0, 1), and may stay interior
// either way. The canonical choice (maximally overlapped edges up, private
// edges of their cycles down, the rest interior) is tried first; when its
// vertex order is contradictory the remaining assignments are explored.
std::optional<std::pair<std::vector<EdgeClass>, Eigen::VectorXd>> search_edge_classes(
    const DirectedGraph& g, const CycleCover& cover, double lambda) {
  const int m = g.edge_count();
  const Eigen::VectorXi& t = cover.multiplicity;
  const int t_max = t.maxCoeff();

  std::vector<char> prefers_lower(static_cast<size_t>(m), 0);
  for (const auto& cycle : cover.cycles) {
    const bool touches_max =
        std::any_of(cycle.begin(), cycle.end(), [&](int e) { return t[e] == t_max; });
    if (!touches_max) continue;
    for (int e : cycle) {
      if (t[e] == 1) prefers_lower[static_cast<size_t>(e)] = 1;
    }
  }

  std::vector<std::vector<EdgeClass>> candidates(static_cast<size_t>(m));
  for (int j = 0; j < m; ++j) {
    const double pinned = lambda * t[j];
    auto& list = candidates[static_cast<size_t>(j)];
    if (pinned > 1.0) {
      list = {EdgeClass::UpperPinned, EdgeClass::Interior};
    } else if (pinned < 1.0) {
      list = prefers_lower[static_cast<size_t>(j)]
                 ? std::vector<EdgeClass>{EdgeClass::LowerPinned, EdgeClass::Interior}
                 : std::vector<EdgeClass>{EdgeClass::Interior, EdgeClass::LowerPinned};
    } else {
      list = {EdgeClass::Interior};
    }
  }

  std::vector<EdgeClass> assignment(static_cast<size_t>(m), EdgeClass::Interior);
  std::optional<std::pair<std::vector<EdgeClass>, Eigen::VectorXd>> found;
  auto dfs = [&](auto&& self, int edge) -> bool {
    if (edge == m) {
      const bool any_strict = std::any_of(assignment.begin(), assignment.end(), [](EdgeClass c) {
        return c != EdgeClass::Interior;
      });
      if (!any_strict) return false;  // a flat order would be a consensus state
      const std::optional<Eigen::VectorXd> potentials = solve_vertex_order(g, assignment);
      if (!potentials) return false;
      found = std::make_pair(assignment, *potentials);
      return true;
    }
    for (EdgeClass c : candidates[static_cast<size_t>(edge)]) {
      assignment[static_cast<size_t>(edge)] = c;
      if (self(self, edge + 1)) return true;
    }
    return false;
  };
  dfs(dfs, 0);
  return found;
}

// Builds the scenario for a classified pinned-flow equilibrium: flows
// lambda * T, vertex potentials from the order solve, matched controller
// state strictly inside (0, 1) per edge.
Counterexample assemble_counterexample(const DirectedGraph& g,
                                       const std::vector<EdgeClass>& edge_class,
                                       const Eigen::VectorXd& potentials, double lambda,
                                       const Eigen::VectorXi& t) {
  const int m = g.edge_count();
  Eigen::VectorXd x_c_bar(m);
  Eigen::VectorXd xc_tilde0(m);
  for (int j = 0; j < m; ++j) {
    const double lt = lambda * t[j];
    switch (edge_class[static_cast<size_t>(j)]) {
      case EdgeClass::UpperPinned:
        x_c_bar[j] = lt - 1.0;
        xc_tilde0[j] = -1.0;
        break;
      case EdgeClass::LowerPinned:
        x_c_bar[j] = lt;
        xc_tilde0[j] = 1.0;
        break;
      case EdgeClass::Interior: {
        const double lo = std::max(0.0, lt - 1.0);
        const double hi = std::min(1.0, lt);
        const double preferred = lt - 0.5;
        x_c_bar[j] = (preferred > lo && preferred < hi) ? preferred : 0.5 * (lo + hi);
        xc_tilde0[j] = -lt;
        break;
      }
    }
    assert(x_c_bar[j] > 0.0 && x_c_bar[j] < 1.0);
  }

  const Eigen::VectorXd injection = g.incidence_matrix() * x_c_bar;
  assert(injection.cwiseAbs().maxCoeff() > 0.0);

  FlowConstraints constraints;
  constraints.lower = Eigen::VectorXd::Zero(m);
  constraints.upper = Eigen::VectorXd::Ones(m);

  Scenario s{
      .name = "counterexample-" + std::to_string(g.vertex_count()) + "v-" + std::to_string(m) + "e",
      .notes = "",
      .graph = g,
      .constraints = std::move(constraints),
      .hamiltonian = Hamiltonian::quadratic(g.vertex_count()),
      .controller = ControllerSpec{ControllerSpec::Kind::SaturatedPI, Eigen::VectorXd()},
      .disturbance = terminals_for_injection(injection),
      .x0 = potentials,
      .xc0 = xc_tilde0 + x_c_bar,
      .integrator = IntegratorParams{},
  };
  s.validate();
  return Counterexample{std::move(s), std::move(x_c_bar), lambda, t};
}

std::optional<Counterexample> counterexample_from_cover(const DirectedGraph& g,
                                                        const CycleCover& cover) {
  const Eigen::VectorXi& t = cover.multiplicity;
  const int t_max = t.maxCoeff();
  assert(t_max >= 2);

  const double lambda = 0.5 * (1.0 / t_max + std::min(1.0, 2.0 / t_max));

  const auto searched = search_edge_classes(g, cover, lambda);
  if (!searched) return std::nullopt;
  return assemble_counterexample(g, searched->first, searched->second, lambda, t);
}

// A few unbalanced graphs admit no pinned-flow equilibrium over any
// minimum-cardinality cover: antiparallel edge pairs with equal multiplicity
// force equal potentials across them, which collapses the required order.
// This fallback fixes the vertex order first, finds a positive circulation
// compatible with the induced edge classes by linear programming, and scales
// it to a small integer cycle multiset T with a common multiplier interval.
std::optional<Counterexample> counterexample_from_order(const DirectedGraph& g) {
  const int n = g.vertex_count();
  const int m = g.edge_count();
  if (n > 6) return std::nullopt;  // level enumeration grows as n^n

  std::set<std::vector<int>> seen;
  std::vector<std::vector<int>> orders;
  std::vector<int> levels(static_cast<size_t>(n), 0);
  while (true) {
    std::vector<int> distinct(levels.begin(), levels.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() >= 2) {
      std::vector<int> normalized(static_cast<size_t>(n));
      for (int v = 0; v < n; ++v) {
        normalized[static_cast<size_t>(v)] = static_cast<int>(
            std::lower_bound(distinct.begin(), distinct.end(), levels[static_cast<size_t>(v)]) -
            distinct.begin());
      }
      if (seen.insert(normalized).second) orders.push_back(std::move(normalized));
    }
    int pos = 0;
    while (pos < n && ++levels[static_cast<size_t>(pos)] == n) {
      levels[static_cast<size_t>(pos)] = 0;
      ++pos;
    }
    if (pos == n) break;
  }

  const Eigen::MatrixXd b = g.incidence_matrix();
  for (const std::vector<int>& order : orders) {
    Eigen::VectorXd nu(n);
    for (int v = 0; v < n; ++v) nu[v] = static_cast<double>(order[static_cast<size_t>(v)]);
    const Eigen::VectorXd drop = b.transpose() * nu;  // head minus tail per edge

    std::vector<EdgeClass> edge_class(static_cast<size_t>(m), EdgeClass::Interior);
    bool any_upper = false;
    bool any_lower = false;
    for (int j = 0; j < m; ++j) {
      if (drop[j] < 0.0) {
        edge_class[static_cast<size_t>(j)] = EdgeClass::UpperPinned;
        any_upper = true;
      } else if (drop[j] > 0.0) {
        edge_class[static_cast<size_t>(j)] = EdgeClass::LowerPinned;
        any_lower = true;
      }
    }
    // a circulation cannot balance one-sided pins
    if (!any_upper || !any_lower) continue;

    // maximize the margin t: B w = 0, class_lo + t <= w_e <= class_hi - t
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n + 2 * m, m + 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * n + 2 * m);
    a.topLeftCorner(n, m) = b;
    a.block(n, 0, n, m) = -b;
    for (int j = 0; j < m; ++j) {
      const bool upper = edge_class[static_cast<size_t>(j)] == EdgeClass::UpperPinned;
      const bool lower = edge_class[static_cast<size_t>(j)] == EdgeClass::LowerPinned;
      const double class_lo = upper ? 1.0 : 0.0;
      const double class_hi = lower ? 1.0 : 2.0;
      a(2 * n + 2 * j, j) = 1.0;
      a(2 * n + 2 * j, m) = 1.0;
      rhs[2 * n + 2 * j] = class_hi;
      a(2 * n + 2 * j + 1, j) = -1.0;
      a(2 * n + 2 * j + 1, m) = 1.0;
      rhs[2 * n + 2 * j + 1] = -class_lo;
    }
    Eigen::VectorXd objective = Eigen::VectorXd::Zero(m + 1);
    objective[m] = 1.0;
    const LpResult lp = solve_lp_max(a, rhs, objective);
    if (lp.status != LpResult::Status::Optimal || lp.objective <= 1e-7) continue;
    const Eigen::VectorXd w = lp.solution.head(m);

    for (int q = 1; q <= 96; ++q) {
      Eigen::VectorXi t(m);
      bool integral = true;
      for (int j = 0; j < m && integral; ++j) {
        const double scaled = q * w[j];
        t[j] = static_cast<int>(std::llround(scaled));
        if (std::abs(scaled - t[j]) > 1e-6 || t[j] < 1 || t[j] > 64) integral = false;
      }
      if (!integral) continue;
      std::vector<long long> net(static_cast<size_t>(n), 0);
      for (int j = 0; j < m; ++j) {
        net[static_cast<size_t>(g.edge(j).head)] += t[j];
        net[static_cast<size_t>(g.edge(j).tail)] -= t[j];
      }
      if (!std::all_of(net.begin(), net.end(), [](long long v) { return v == 0; })) continue;

      double lo = 0.0;
      double hi = std::numeric_limits<double>::infinity();
      for (int j = 0; j < m; ++j) {
        switch (edge_class[static_cast<size_t>(j)]) {
          case EdgeClass::UpperPinned:
            lo = std::max(lo, 1.0 / t[j]);
            hi = std::min(hi, 2.0 / t[j]);
            break;
          case EdgeClass::LowerPinned:
            hi = std::min(hi, 1.0 / t[j]);
            break;
          case EdgeClass::Interior:
            hi = std::min(hi, 2.0 / t[j]);
            break;
        }
      }
      if (!(lo + 1e-9 < hi)) continue;
      const double lambda = 0.5 * (lo + hi);

      bool ranges_ok = true;
      for (int j = 0; j < m && ranges_ok; ++j) {
        const double lt = lambda * t[j];
        switch (edge_class[static_cast<size_t>(j)]) {
          case EdgeClass::UpperPinned:
            ranges_ok = lt > 1.0 && lt < 2.0;
            break;
          case EdgeClass::LowerPinned:
            ranges_ok = lt > 0.0 && lt < 1.0;
            break;
          case EdgeClass::Interior:
            ranges_ok = lt > 0.0 && lt < 2.0;
            break;
        }
      }
      if (!ranges_ok) continue;
      return assemble_counterexample(g, edge_class, nu, lambda, t);
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<Counterexample> build_counterexample(const DirectedGraph& g) {
  if (!is_strongly_connected(g)) {
    throw std::invalid_argument("build_counterexample: graph must be strongly connected");
  }
  if (is_balanced(g)) return std::nullopt;
  if (g.edge_count() > 16) {
    throw std::invalid_argument(
        "build_counterexample: refusing uncertified cycle cover (more than 16 edges)");
  }
  const std::vector<CycleCover> covers = all_minimal_cycle_covers(g, 64);
  for (const CycleCover& cover : covers) {
    std::optional<Counterexample> built = counterexample_from_cover(g, cover);
    if (built) return built;
  }
  std::optional<Counterexample> built = counterexample_from_order(g);
  if (built) return built;
  throw std::runtime_error(
      "build_counterexample: no pinned-flow equilibrium construction found");
}

namespace {

const json& require(const json& j, const char* key, const std::string& context) {
  auto it = j.find(key);
  if (it == j.end()) throw std::invalid_argument(context + "." + key + ": missing");
  return *it;
}

Eigen::VectorXd parse_vector(const json& j, const std::string& context) {
  if (!j.is_array()) throw std::invalid_argument(context + ": expected an array of numbers");
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw std::invalid_argument(context + ": expected an array of numbers");
    v[static_cast<int>(i)] = j[i].get<double>();
  }
  return v;
}

json dump_vector(const Eigen::VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

DirectedGraph parse_graph(const json& j, const std::string& context) {
  const json& jn = require(j, "n", context);
  if (!jn.is_number_integer()) throw std::invalid_argument(context + ".n: expected an integer");
  const json& je = require(j, "edges", context);
  if (!je.is_array()) throw std::invalid_argument(context + ".edges: expected an array of pairs");
  std::vector<Edge> edges;
  edges.reserve(je.size());
  for (size_t i = 0; i < je.size(); ++i) {
    const json& pair = je[i];
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() ||
        !pair[1].is_number_integer()) {
      throw std::invalid_argument(context + ".edges[" + std::to_string(i) +
                                  "]: expected [tail, head]");
    }
    edges.push_back(Edge{pair[0].get<int>(), pair[1].get<int>()});
  }
  return DirectedGraph(jn.get<int>(), std::move(edges));
}

Scenario parse_scenario(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("scenario: expected a JSON object");
  const json& jname = require(j, "name", "scenario");
  if (!jname.is_string()) throw std::invalid_argument("scenario.name: expected a string");

  DirectedGraph graph = parse_graph(require(j, "graph", "scenario"), "graph");
  const int n = graph.vertex_count();

  std::optional<FlowConstraints> constraints;
  const json& jc = require(j, "constraints", "scenario");
  if (!jc.is_null()) {
    FlowConstraints c;
    c.lower = parse_vector(require(jc, "lower", "constraints"), "constraints.lower");
    c.upper = parse_vector(require(jc, "upper", "constraints"), "constraints.upper");
    c.validate(graph.edge_count());
    constraints = std::move(c);
  }

  const json& jh = require(j, "hamiltonian", "scenario");
  const std::string hkind = require(jh, "kind", "hamiltonian").get<std::string>();
  Hamiltonian hamiltonian = Hamiltonian::quadratic(std::max(n, 1));
  if (hkind == "quadratic") {
    hamiltonian = Hamiltonian::quadratic(n);
  } else if (hkind == "weighted") {
    Eigen::VectorXd w = parse_vector(require(jh, "weights", "hamiltonian"), "hamiltonian.weights");
    if (w.size() != n) {
      throw std::invalid_argument("hamiltonian.weights: one weight per vertex required");
    }
    hamiltonian = Hamiltonian::weighted(std::move(w));
  } else {
    throw std::invalid_argument("hamiltonian.kind: expected \"quadratic\" or \"weighted\"");
  }

  const json& jctl = require(j, "controller", "scenario");
  const std::string ckind = require(jctl, "kind", "controller").get<std::string>();
  ControllerSpec controller;
  if (ckind == "P" || ckind == "PI") {
    controller.kind =
        ckind == "P" ? ControllerSpec::Kind::Proportional : ControllerSpec::Kind::PI;
    controller.gains = parse_vector(require(jctl, "gains", "controller"), "controller.gains");
  } else if (ckind == "PI_sat") {
    controller.kind = ControllerSpec::Kind::SaturatedPI;
  } else {
    throw std::invalid_argument("controller.kind: expected \"P\", \"PI\" or \"PI_sat\"");
  }

  std::optional<DisturbanceModel> disturbance;
  const json& jd = require(j, "disturbance", "scenario");
  if (!jd.is_null()) {
    const json& je = require(jd, "E", "disturbance");
    if (!je.is_array() || static_cast<int>(je.size()) != n) {
      throw std::invalid_argument("disturbance.E: one row per vertex required");
    }
    DisturbanceModel dist;
    const size_t k = je.empty() ? 0 : je[0].size();
    dist.terminals = Eigen::MatrixXd::Zero(n, static_cast<int>(k));
    for (int i = 0; i < n; ++i) {
      const json& row = je[static_cast<size_t>(i)];
      if (!row.is_array() || row.size() != k) {
        throw std::invalid_argument("disturbance.E: rows must have equal length");
      }
      for (size_t col = 0; col < k; ++col) {
        dist.terminals(i, static_cast<int>(col)) = row[col].get<double>();
      }
    }
    dist.rates = parse_vector(require(jd, "d", "disturbance"), "disturbance.d");
    dist.validate(n);
    disturbance = std::move(dist);
  }

  IntegratorParams params;
  const json& ji = require(j, "integrator", "scenario");
  params.step = require(ji, "step", "integrator").get<double>();
  params.horizon = require(ji, "horizon", "integrator").get<double>();
  const json& jstride = require(ji, "stride", "integrator");
  if (!jstride.is_number_integer()) {
    throw std::invalid_argument("integrator.stride: expected an integer");
  }
  params.stride = jstride.get<int>();
  if (ji.contains("tol_rate")) params.tol_rate = ji["tol_rate"].get<double>();
  if (ji.contains("tol_consensus")) params.tol_consensus = ji["tol_consensus"].get<double>();

  Scenario s{
      .name = jname.get<std::string>(),
      .notes = j.contains("notes") ? j["notes"].get<std::string>() : std::string(),
      .graph = std::move(graph),
      .constraints = std::move(constraints),
      .hamiltonian = std::move(hamiltonian),
      .controller = std::move(controller),
      .disturbance = std::move(disturbance),
      .x0 = parse_vector(require(j, "x0", "scenario"), "x0"),
      .xc0 = parse_vector(require(j, "xc0", "scenario"), "xc0"),
      .integrator = params,
  };
  canonicalize_scenario(s);
  s.validate();
  return s;
}

json scenario_to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  if (!s.notes.empty()) j["notes"] = s.notes;

  json graph;
  graph["n"] = s.graph.vertex_count();
  json edges = json::array();
  for (const Edge& e : s.graph.edges()) edges.push_back(json::array({e.tail, e.head}));
  graph["edges"] = std::move(edges);
  j["graph"] = std::move(graph);

  if (s.constraints) {
    j["constraints"] = json{{"lower", dump_vector(s.constraints->lower)},
                            {"upper", dump_vector(s.constraints->upper)}};
  } else {
    j["constraints"] = nullptr;
  }

  if (s.hamiltonian.is_weighted()) {
    j["hamiltonian"] = json{{"kind", "weighted"}, {"weights", dump_vector(s.hamiltonian.weights())}};
  } else {
    j["hamiltonian"] = json{{"kind", "quadratic"}};
  }

  switch (s.controller.kind) {
    case ControllerSpec::Kind::Proportional:
      j["controller"] = json{{"kind", "P"}, {"gains", dump_vector(s.controller.gains)}};
      break;
    case ControllerSpec::Kind::PI:
      j["controller"] = json{{"kind", "PI"}, {"gains", dump_vector(s.controller.gains)}};
      break;
    case ControllerSpec::Kind::SaturatedPI:
      j["controller"] = json{{"kind", "PI_sat"}};
      break;
  }

  if (s.disturbance) {
    json rows = json::array();
    for (int i = 0; i < s.disturbance->terminals.rows(); ++i) {
      json row = json::array();
      for (int c = 0; c < s.disturbance->terminals.cols(); ++c) {
        row.push_back(s.disturbance->terminals(i, c));
      }
      rows.push_back(std::move(row));
    }
    j["disturbance"] = json{{"E", std::move(rows)}, {"d", dump_vector(s.disturbance->rates)}};
  } else {
    j["disturbance"] = nullptr;
  }

  j["x0"] = dump_vector(s.x0);
  j["xc0"] = dump_vector(s.xc0);

  json integrator;
  integrator["step"] = s.integrator.step;
  integrator["horizon"] = s.integrator.horizon;
  integrator["stride"] = s.integrator.stride;
  if (s.integrator.tol_rate) integrator["tol_rate"] = *s.integrator.tol_rate;
  if (s.integrator.tol_consensus) integrator["tol_consensus"] = *s.integrator.tol_consensus;
  j["integrator"] = std::move(integrator);

  return j;
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario: invalid JSON: ") + e.what());
  }
  return parse_scenario(j);
}

std::string scenario_to_json_text(const Scenario& s) {
  return scenario_to_json(s).dump(2) + "\n";
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return scenario_from_json_text(buffer.str());
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file: " + path.string());
  out << scenario_to_json_text(s);
}

DirectedGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  json j;
  try {
    j = json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("graph: invalid JSON: ") + e.what());
  }
  return parse_graph(j, "graph");
}

}  // namespace flownet
