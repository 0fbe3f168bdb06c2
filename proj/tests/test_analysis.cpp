#include <doctest.h>

#include <cmath>

#include "flownet/analysis.hpp"
#include "flownet/sim.hpp"
#include "support.hpp"

using namespace flownet;
namespace ts = flownet::testsupport;

namespace {

DirectedGraph five_vertex_demo_graph() {
  return DirectedGraph(5, {{0, 1}, {1, 2}, {2, 0}, {0, 3}, {3, 2}, {0, 4}, {4, 1}});
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("permission set intervals per constraint class") {
  FlowConstraints c;
  c.lower = Eigen::VectorXd(3);
  c.upper = Eigen::VectorXd(3);
  c.lower << -1.0, -3.0, 0.0;
  c.upper << 2.0, 1.5, 0.7;
  // another unidirectional edge with a smaller cap drives the shared bound
  FlowConstraints c4;
  c4.lower = Eigen::VectorXd(4);
  c4.upper = Eigen::VectorXd(4);
  c4.lower << -1.0, -3.0, 0.0, 0.0;
  c4.upper << 2.0, 1.5, 0.7, 0.4;

  const PermissionSet p = permission_set(c4);
  CHECK(p.lo[0] == -1.0);  // |lower| <= upper: symmetric at |lower|
  CHECK(p.hi[0] == 1.0);
  CHECK(p.lo[1] == -1.5);  // |lower| > upper: symmetric at upper
  CHECK(p.hi[1] == 1.5);
  CHECK(p.lo[2] == 0.0);  // unidirectional: shared (0, min upper)
  CHECK(p.hi[2] == 0.4);
  CHECK(p.hi[3] == 0.4);

  Eigen::VectorXd inside(4);
  inside << 0.0, 0.5, 0.2, 0.2;
  CHECK(p.contains(inside));
  inside[2] = 0.0;  // boundary is excluded
  CHECK_FALSE(p.contains(inside));
}

TEST_CASE("matching with zero injection is trivially feasible") {
  const DirectedGraph g = five_vertex_demo_graph();
  DisturbanceModel none;
  none.terminals = Eigen::MatrixXd::Zero(5, 0);
  none.rates = Eigen::VectorXd::Zero(0);
  const MatchingResult r = solve_matching(g, none);
  CHECK(r.feasible);
  CHECK(r.residual == 0.0);
  CHECK(r.x_c_bar->cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("matching the demo injection") {
  const DirectedGraph g = five_vertex_demo_graph();
  const Eigen::VectorXd injection = g.incidence_matrix() * Eigen::VectorXd::Constant(7, 0.5);
  const MatchingResult r = solve_matching_injection(g, injection);
  REQUIRE(r.feasible);
  CHECK(r.residual <= 1e-12);
  CHECK((g.incidence_matrix() * *r.x_c_bar - injection).norm() <= 1e-12);
}

TEST_CASE("an edgeless graph can absorb nothing") {
  const DirectedGraph isolated(2, {});
  DisturbanceModel dist;
  dist.terminals = Eigen::MatrixXd::Zero(2, 1);
  dist.terminals(0, 0) = 1.0;
  dist.rates = Eigen::VectorXd::Ones(1);
  const MatchingResult r = solve_matching(isolated, dist);
  CHECK_FALSE(r.feasible);
  CHECK(r.residual == doctest::Approx(1.0));
}

TEST_CASE("net inflow must cancel net outflow on a connected graph") {
  const DirectedGraph g = five_vertex_demo_graph();
  DisturbanceModel lopsided;
  lopsided.terminals = Eigen::MatrixXd::Zero(5, 1);
  lopsided.terminals(0, 0) = 1.0;
  lopsided.rates = Eigen::VectorXd::Ones(1);
  const MatchingResult r = solve_matching(g, lopsided);
  CHECK_FALSE(r.feasible);
  CHECK_FALSE(r.x_c_bar.has_value());
}

TEST_CASE("adjust_into_permission_set finds the centered matched state") {
  const DirectedGraph g = five_vertex_demo_graph();
  const Eigen::VectorXd injection = g.incidence_matrix() * Eigen::VectorXd::Constant(7, 0.5);
  const DisturbanceModel dist = ts::disturbance_for_injection(injection);
  PermissionSet pset;
  pset.lo = Eigen::VectorXd::Zero(7);
  pset.hi = Eigen::VectorXd::Ones(7);
  const auto point = adjust_into_permission_set(g, dist, pset);
  REQUIRE(point.has_value());
  // slack 1/2 forces every coordinate to the center
  CHECK((*point - Eigen::VectorXd::Constant(7, 0.5)).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(pset.contains(*point));
  CHECK((g.incidence_matrix() * *point - injection).norm() <= 1e-9);
}

TEST_CASE("acyclic graphs admit no interior matched state for zero injection") {
  const DirectedGraph path(3, {{0, 1}, {1, 2}});
  DisturbanceModel none;
  none.terminals = Eigen::MatrixXd::Zero(3, 0);
  none.rates = Eigen::VectorXd::Zero(0);
  PermissionSet uni;
  uni.lo = Eigen::VectorXd::Zero(2);
  uni.hi = Eigen::VectorXd::Ones(2);
  // ker B = 0 forces x_c = 0, which sits on the excluded boundary
  CHECK_FALSE(adjust_into_permission_set(path, none, uni).has_value());

  PermissionSet symmetric;
  symmetric.lo = -Eigen::VectorXd::Ones(2);
  symmetric.hi = Eigen::VectorXd::Ones(2);
  const auto centered = adjust_into_permission_set(path, none, symmetric);
  REQUIRE(centered.has_value());
  CHECK(centered->cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("adjust_into_permission_set requires a feasible matching") {
  const DirectedGraph g(2, {{0, 1}});
  DisturbanceModel lopsided;
  lopsided.terminals = Eigen::MatrixXd::Zero(2, 1);
  lopsided.terminals(0, 0) = 1.0;
  lopsided.rates = Eigen::VectorXd::Ones(1);
  PermissionSet pset;
  pset.lo = -Eigen::VectorXd::Ones(1);
  pset.hi = Eigen::VectorXd::Ones(1);
  CHECK_THROWS_AS(adjust_into_permission_set(g, lopsided, pset), std::invalid_argument);
}

TEST_CASE("pi Lyapunov function is a shifted positive quadratic") {
  const Hamiltonian h = Hamiltonian::quadratic(3);
  const Eigen::VectorXd xc_bar = Eigen::VectorXd::Constant(2, 0.7);
  CHECK(lyapunov_pi(h, Eigen::VectorXd::Zero(3), xc_bar, xc_bar) == 0.0);
  ts::Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd x = ts::random_vector(rng, 3, -4.0, 4.0);
    const Eigen::VectorXd xc = ts::random_vector(rng, 2, -4.0, 4.0);
    CHECK(lyapunov_pi(h, x, xc, xc_bar) >= 0.0);
  }
}

TEST_CASE("saturated Lyapunov function vanishes at the origin for zero injection") {
  const DirectedGraph g(3, {{0, 1}, {1, 2}, {2, 0}});
  const FlowConstraints c = ts::unit_unidirectional_constraints(3);
  CHECK(lyapunov_saturated(g, Hamiltonian::quadratic(3), c, Eigen::VectorXd::Zero(3),
                           Eigen::VectorXd::Zero(3)) == 0.0);
}

TEST_CASE("saturated Lyapunov gradient matches finite differences") {
  ts::Rng rng(42);
  const DirectedGraph g = ts::random_weakly_connected(rng, 4, 6);
  const Hamiltonian h = Hamiltonian::quadratic(4);
  const FlowConstraints c = ts::random_constraints(rng, 6, 0.5);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd x = ts::random_vector(rng, 4, -3.0, 3.0);
    const Eigen::VectorXd xc = ts::random_vector(rng, 6, -3.0, 3.0);
    const Eigen::VectorXd grad = lyapunov_saturated_gradient(g, h, c, x, xc);
    const double fd_step = 1e-6;
    for (int i = 0; i < 10; ++i) {
      Eigen::VectorXd xp = x, xm = x, xcp = xc, xcm = xc;
      double analytic = 0.0;
      if (i < 4) {
        xp[i] += fd_step;
        xm[i] -= fd_step;
        analytic = grad[i];
      } else {
        xcp[i - 4] += fd_step;
        xcm[i - 4] -= fd_step;
        analytic = grad[i];
      }
      const double fd = (lyapunov_saturated(g, h, c, xp, xcp) -
                         lyapunov_saturated(g, h, c, xm, xcm)) /
                        (2.0 * fd_step);
      CHECK(std::abs(fd - analytic) <= 1e-6 * (1.0 + std::abs(analytic)));
    }
  }
}

TEST_CASE("saturated Lyapunov function grows along random rays") {
  ts::Rng rng(43);
  const DirectedGraph g = ts::random_weakly_connected(rng, 4, 6);
  const Hamiltonian h = Hamiltonian::quadratic(4);
  const FlowConstraints c = ts::random_constraints(rng, 6, 0.5);
  for (int ray = 0; ray < 20; ++ray) {
    Eigen::VectorXd dx = ts::random_vector(rng, 4, -1.0, 1.0);
    Eigen::VectorXd dxc = ts::random_vector(rng, 6, -1.0, 1.0);
    const double norm = std::hypot(dx.norm(), dxc.norm());
    dx /= norm;
    dxc /= norm;
    double prev = lyapunov_saturated(g, h, c, 1e3 * dx, 1e3 * dxc);
    for (double r : {3e3, 1e4, 3e4}) {
      const double cur = lyapunov_saturated(g, h, c, r * dx, r * dxc);
      CHECK(cur > prev);
      prev = cur;
    }
  }
}

TEST_CASE("Lyapunov values decrease along simulated runs") {
  ts::Rng rng(44);
  // a saturated run with zero injection and a pi run with a matched injection
  const DirectedGraph g = ts::random_weakly_connected(rng, 4, 6);
  const Scenario sat = ts::make_saturated_scenario(
      g, ts::random_constraints(rng, 6, 0.5), std::nullopt, ts::random_vector(rng, 4, -2.0, 2.0),
      ts::random_vector(rng, 6, -1.0, 1.0), 0.01, 50.0, 10);
  const Scenario pi = ts::make_pi_scenario(
      g, ts::random_vector(rng, 6, 0.5, 2.0), ts::balanced_pair_disturbance(rng, 4, {0, 1, 2, 3}, 1),
      ts::random_vector(rng, 4, -2.0, 2.0), ts::random_vector(rng, 6, -1.0, 1.0), 0.01, 50.0, 10);
  for (const Scenario& s : {sat, pi}) {
    const Trajectory traj = integrate(s);
    REQUIRE(traj.has_lyapunov);
    for (size_t k = 1; k < traj.samples(); ++k) {
      CHECK(traj.lyapunov[k] <=
            traj.lyapunov[k - 1] + 1e-9 * (1.0 + std::abs(traj.lyapunov[k - 1])));
    }
  }
}

TEST_CASE("consensus check reports the gradient mean") {
  const Hamiltonian h = Hamiltonian::quadratic(4);
  const ConsensusCheck at_consensus =
      consensus_check(h, Eigen::VectorXd::Constant(4, 3.0), 1e-4);
  CHECK(at_consensus.consensus);
  CHECK(at_consensus.alpha == doctest::Approx(3.0));

  Eigen::VectorXd spread(4);
  spread << 1, 2, 3, 4;
  CHECK_FALSE(consensus_check(h, spread, 1e-4).consensus);

  // shifting every component shifts alpha but not the deviation
  ts::Rng rng(45);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd x = ts::random_vector(rng, 4, -2.0, 2.0);
    const double shift = ts::random_vector(rng, 1, -5.0, 5.0)[0];
    const ConsensusCheck a = consensus_check(h, x, 1e-3);
    const ConsensusCheck b =
        consensus_check(h, x + Eigen::VectorXd::Constant(4, shift), 1e-3);
    CHECK(a.consensus == b.consensus);
    CHECK(b.alpha == doctest::Approx(a.alpha + shift).epsilon(1e-9));
  }
}

TEST_CASE("equilibrium classification") {
  const Scenario demo = unbalanced_five_vertex();

  SUBCASE("a consensus state with matched controller state") {
    ts::Rng rng(46);
    const DirectedGraph g(3, {{0, 1}, {1, 2}, {2, 0}});
    const Scenario s = ts::make_pi_scenario(g, Eigen::VectorXd::Ones(3), std::nullopt,
                                            Eigen::VectorXd::Constant(3, 2.0),
                                            Eigen::VectorXd::Zero(3), 0.01, 1.0, 1);
    const EquilibriumClass e = classify_equilibrium(s, s.x0, s.xc0);
    CHECK(e.is_equilibrium);
    CHECK(e.gradient_aligned);
  }

  SUBCASE("the demo initial state is not an equilibrium") {
    const EquilibriumClass e = classify_equilibrium(demo, demo.x0, demo.xc0);
    CHECK_FALSE(e.is_equilibrium);
  }

  SUBCASE("the constructed counterexample starts at a pinned non-consensus equilibrium") {
    const auto built = build_counterexample(demo.graph);
    REQUIRE(built.has_value());
    const EquilibriumClass e =
        classify_equilibrium(built->scenario, built->scenario.x0, built->scenario.xc0);
    CHECK(e.is_equilibrium);
    CHECK_FALSE(e.gradient_aligned);
  }
}

TEST_CASE("convergence prediction dispatch") {
  SUBCASE("demo scenario fails on balance") {
    const ConvergenceVerdict v = predict_convergence(unbalanced_five_vertex());
    REQUIRE(v.consensus_expected.has_value());
    CHECK_FALSE(*v.consensus_expected);
    CHECK(v.reason == "unbalanced");
  }

  SUBCASE("bidirectional constraints with an interior matched state") {
    ts::Rng rng(47);
    const DirectedGraph g = ts::random_weakly_connected(rng, 4, 5);
    FlowConstraints c;
    c.lower = Eigen::VectorXd::Constant(5, -2.0);
    c.upper = Eigen::VectorXd::Constant(5, 2.0);
    const Eigen::VectorXd x_c_bar = Eigen::VectorXd::Constant(5, 0.3);
    const Eigen::VectorXd injection = g.incidence_matrix() * x_c_bar;
    const Scenario s = ts::make_saturated_scenario(
        g, c, ts::disturbance_for_injection(injection), Eigen::VectorXd::Zero(4),
        Eigen::VectorXd::Zero(5), 0.01, 1.0, 1);
    const ConvergenceVerdict v = predict_convergence(s);
    REQUIRE(v.consensus_expected.has_value());
    CHECK(*v.consensus_expected);
  }

  SUBCASE("mixed constraint classes with inflows are out of scope") {
    const DirectedGraph g(3, {{0, 1}, {1, 2}, {2, 0}});
    FlowConstraints c;
    c.lower = Eigen::VectorXd(3);
    c.upper = Eigen::VectorXd::Constant(3, 1.0);
    c.lower << -1.0, 0.0, 0.0;
    DisturbanceModel dist;
    dist.terminals = Eigen::MatrixXd::Zero(3, 2);
    dist.terminals(0, 0) = 1.0;
    dist.terminals(1, 1) = -1.0;
    dist.rates = Eigen::VectorXd::Constant(2, 0.1);
    const Scenario s =
        ts::make_saturated_scenario(g, c, dist, Eigen::VectorXd::Zero(3),
                                    Eigen::VectorXd::Zero(3), 0.01, 1.0, 1);
    CHECK_FALSE(predict_convergence(s).consensus_expected.has_value());
  }

  SUBCASE("one-way edge without return path fails for zero injection") {
    const Scenario s = ts::make_saturated_scenario(
        DirectedGraph(2, {{0, 1}}), ts::unit_unidirectional_constraints(1), std::nullopt,
        Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(1), 0.01, 1.0, 1);
    const ConvergenceVerdict v = predict_convergence(s);
    REQUIRE(v.consensus_expected.has_value());
    CHECK_FALSE(*v.consensus_expected);
  }

  SUBCASE("disconnected pi loop cannot reach global consensus") {
    const DirectedGraph g(4, {{0, 1}, {2, 3}});
    const Scenario s =
        ts::make_pi_scenario(g, Eigen::VectorXd::Ones(2), std::nullopt, Eigen::VectorXd::Zero(4),
                             Eigen::VectorXd::Zero(2), 0.01, 1.0, 1);
    const ConvergenceVerdict v = predict_convergence(s);
    REQUIRE(v.consensus_expected.has_value());
    CHECK_FALSE(*v.consensus_expected);
    CHECK(v.reason == "not weakly connected");
  }
}

}  // TEST_SUITE
