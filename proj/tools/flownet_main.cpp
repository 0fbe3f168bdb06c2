#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include "flownet/analysis.hpp"
#include "flownet/plot.hpp"
#include "flownet/scenario.hpp"
#include "flownet/sim.hpp"
#include "flownet/trajectory_io.hpp"

namespace {

using flownet::Scenario;
using nlohmann::json;

struct Options {
  bool pretty = false;
  std::optional<double> tol_consensus;
  std::optional<double> tol_rate;
};

void print_report(const json& report, bool pretty) {
  std::cout << (pretty ? report.dump(2) : report.dump()) << "\n";
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json vector_json(const Eigen::VectorXi& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

// precedence: command-line flag, then scenario file, then environment
void apply_tolerances(Scenario& s, const Options& opt) {
  if (opt.tol_consensus) {
    s.integrator.tol_consensus = *opt.tol_consensus;
  } else if (!s.integrator.tol_consensus) {
    if (const char* env = std::getenv("FLOWNET_TOL_CONSENSUS")) {
      try {
        s.integrator.tol_consensus = std::stod(env);
      } catch (const std::exception&) {
        throw std::invalid_argument("FLOWNET_TOL_CONSENSUS: not a number");
      }
    }
  }
  if (opt.tol_rate) s.integrator.tol_rate = *opt.tol_rate;
}

json summary_json(const flownet::TerminalSummary& t) {
  return json{{"steady", t.steady},
              {"consensus", t.consensus},
              {"alpha", t.alpha},
              {"max_rate", t.max_rate}};
}

int cmd_analyze(const std::string& path, const Options& opt) {
  Scenario s = flownet::load_scenario(path);
  apply_tolerances(s, opt);

  json report;
  report["name"] = s.name;
  report["graph"] = json{{"n", s.graph.vertex_count()}, {"m", s.graph.edge_count()}};
  report["weakly_connected"] = flownet::is_weakly_connected(s.graph);
  const bool strongly = flownet::is_strongly_connected(s.graph);
  report["strongly_connected"] = strongly;
  report["balanced"] = flownet::is_balanced(s.graph);

  if (s.constraints) {
    report["strongly_connected_wrt_constraints"] =
        flownet::strongly_connected_wrt_constraints(s.graph, *s.constraints);
    const flownet::PermissionSet pset = flownet::permission_set(*s.constraints);
    report["permission_set"] = json{{"lo", vector_json(pset.lo)}, {"hi", vector_json(pset.hi)}};
  } else {
    report["strongly_connected_wrt_constraints"] = nullptr;
    report["permission_set"] = nullptr;
  }

  if (strongly && s.graph.edge_count() <= 16) {
    const flownet::CycleCover cover = flownet::minimal_cycle_cover(s.graph);
    report["cycle_cover"] = json{{"k", cover.cycles.size()},
                                 {"T", vector_json(cover.multiplicity)},
                                 {"minimal", cover.minimal},
                                 {"non_overlapping", cover.non_overlapping}};
  } else {
    report["cycle_cover"] = nullptr;
  }

  if (s.disturbance) {
    flownet::MatchingResult matching =
        s.constraints
            ? flownet::solve_matching(s.graph, *s.disturbance,
                                      flownet::permission_set(*s.constraints))
            : flownet::solve_matching(s.graph, *s.disturbance);
    json m;
    m["feasible"] = matching.feasible;
    m["residual"] = matching.residual;
    m["x_c_bar"] = matching.x_c_bar ? vector_json(*matching.x_c_bar) : json(nullptr);
    m["in_permission_set"] =
        matching.in_permission_set ? json(*matching.in_permission_set) : json(nullptr);
    report["matching"] = std::move(m);
  } else {
    report["matching"] = nullptr;
  }

  const flownet::ConvergenceVerdict verdict = flownet::predict_convergence(s);
  report["verdict"] =
      json{{"consensus_expected",
            verdict.consensus_expected ? json(*verdict.consensus_expected) : json(nullptr)},
           {"reason", verdict.reason}};

  print_report(report, opt.pretty);
  return 0;
}

int cmd_simulate(const std::string& path, const std::string& csv_path, const std::string& svg_path,
                 bool lyapunov, const Options& opt) {
  Scenario s = flownet::load_scenario(path);
  apply_tolerances(s, opt);

  flownet::Trajectory traj;
  try {
    traj = flownet::integrate(s);
  } catch (const flownet::DivergenceError& e) {
    print_report(json{{"error", "divergence"}, {"time", e.time()}}, opt.pretty);
    return 2;
  }

  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("cannot write csv file: " + csv_path);
    flownet::write_trajectory_csv(traj, out, lyapunov && traj.has_lyapunov);
  }
  if (!svg_path.empty()) {
    std::ofstream out(svg_path);
    if (!out) throw std::runtime_error("cannot write svg file: " + svg_path);
    flownet::write_svg_timeseries(traj, s.name, out);
  }

  json report = summary_json(traj.terminal);
  report["final_time"] = traj.times.back();
  report["samples"] = traj.samples();
  report["final_x"] = vector_json(traj.x.back());
  report["final_flow"] = vector_json(traj.flow.back());
  print_report(report, opt.pretty);
  return 0;
}

int cmd_match(const std::string& path, const Options& opt) {
  Scenario s = flownet::load_scenario(path);
  json report;
  report["name"] = s.name;
  if (!s.disturbance) {
    report["matching"] = nullptr;
    report["note"] = "scenario has no disturbance";
    print_report(report, opt.pretty);
    return 0;
  }
  std::optional<flownet::PermissionSet> pset;
  if (s.constraints) pset = flownet::permission_set(*s.constraints);
  flownet::MatchingResult matching = pset
                                         ? flownet::solve_matching(s.graph, *s.disturbance, *pset)
                                         : flownet::solve_matching(s.graph, *s.disturbance);
  json m;
  m["feasible"] = matching.feasible;
  m["residual"] = matching.residual;
  m["x_c_bar"] = matching.x_c_bar ? vector_json(*matching.x_c_bar) : json(nullptr);
  m["in_permission_set"] =
      matching.in_permission_set ? json(*matching.in_permission_set) : json(nullptr);
  if (pset && matching.feasible) {
    const std::optional<Eigen::VectorXd> inside =
        flownet::adjust_into_permission_set(s.graph, *s.disturbance, *pset);
    m["permission_point"] = inside ? vector_json(*inside) : json(nullptr);
  }
  report["matching"] = std::move(m);
  print_report(report, opt.pretty);
  return matching.feasible ? 0 : 1;
}

int cmd_counterexample(const std::string& graph_path, const std::string& out_path,
                       const Options& opt) {
  const flownet::DirectedGraph g = flownet::load_graph(graph_path);
  const std::optional<flownet::Counterexample> built = flownet::build_counterexample(g);
  if (!built) {
    print_report(json{{"counterexample", false}, {"reason", "graph is balanced"}}, opt.pretty);
    return 1;
  }
  flownet::save_scenario(built->scenario, out_path);
  json report;
  report["counterexample"] = true;
  report["scenario"] = out_path;
  report["lambda"] = built->lambda;
  report["multiplicity"] = vector_json(built->multiplicity);
  report["x_c_bar"] = vector_json(built->x_c_bar);
  print_report(report, opt.pretty);
  return 0;
}

// ---- verify suites ------------------------------------------------------

struct SuiteCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<Scenario> builtin_scenarios() {
  std::vector<Scenario> list;
  list.push_back(flownet::unbalanced_five_vertex());

  {  // balanced three-cycle under PI with paired in/outflow
    flownet::DirectedGraph g(3, {{0, 1}, {1, 2}, {2, 0}});
    flownet::DisturbanceModel dist;
    dist.terminals = Eigen::MatrixXd::Zero(3, 2);
    dist.terminals(0, 0) = 1.0;
    dist.terminals(1, 1) = -1.0;
    dist.rates = Eigen::VectorXd::Constant(2, 0.25);
    Eigen::VectorXd x0(3);
    x0 << 1, 2, 3;
    Scenario s{
        .name = "three-cycle-pi",
        .notes = "",
        .graph = std::move(g),
        .constraints = std::nullopt,
        .hamiltonian = flownet::Hamiltonian::quadratic(3),
        .controller = flownet::ControllerSpec{flownet::ControllerSpec::Kind::PI,
                                              Eigen::VectorXd::Ones(3)},
        .disturbance = std::move(dist),
        .x0 = std::move(x0),
        .xc0 = Eigen::VectorXd::Zero(3),
        .integrator = flownet::IntegratorParams{0.01, 200.0, 20, std::nullopt, std::nullopt},
    };
    s.validate();
    list.push_back(std::move(s));
  }

  {  // saturated two-vertex chain, single one-way edge, zero inflow
    flownet::DirectedGraph g(2, {{0, 1}});
    flownet::FlowConstraints c;
    c.lower = Eigen::VectorXd::Zero(1);
    c.upper = Eigen::VectorXd::Ones(1);
    Eigen::VectorXd x0(2);
    x0 << 0, 1;
    Scenario s{
        .name = "two-vertex-one-way",
        .notes = "",
        .graph = std::move(g),
        .constraints = std::move(c),
        .hamiltonian = flownet::Hamiltonian::quadratic(2),
        .controller = flownet::ControllerSpec{flownet::ControllerSpec::Kind::SaturatedPI,
                                              Eigen::VectorXd()},
        .disturbance = std::nullopt,
        .x0 = std::move(x0),
        .xc0 = Eigen::VectorXd::Zero(1),
        .integrator = flownet::IntegratorParams{0.01, 50.0, 10, std::nullopt, std::nullopt},
    };
    s.validate();
    list.push_back(std::move(s));
  }
  return list;
}

std::vector<SuiteCheck> run_conservation_suite() {
  std::vector<SuiteCheck> checks;
  for (const Scenario& s : builtin_scenarios()) {
    if (s.controller.kind == flownet::ControllerSpec::Kind::Proportional) continue;
    const flownet::Trajectory traj = flownet::integrate(s);
    const double total0 = traj.x.front().sum();
    const double rate = s.net_injection().sum();
    double worst = 0.0;
    for (size_t k = 0; k < traj.samples(); ++k) {
      worst = std::max(worst, std::abs(traj.x[k].sum() - total0 - traj.times[k] * rate));
    }
    const double bound = 1e-6 * (1.0 + std::abs(total0));
    checks.push_back({"conservation:" + s.name, worst <= bound,
                      "max drift " + std::to_string(worst)});
  }
  return checks;
}

std::vector<SuiteCheck> run_lyapunov_suite() {
  std::vector<SuiteCheck> checks;
  for (const Scenario& s : builtin_scenarios()) {
    const flownet::Trajectory traj = flownet::integrate(s);
    if (!traj.has_lyapunov) continue;
    bool monotone = true;
    for (size_t k = 1; k < traj.samples(); ++k) {
      if (traj.lyapunov[k] >
          traj.lyapunov[k - 1] + 1e-9 * (1.0 + std::abs(traj.lyapunov[k - 1]))) {
        monotone = false;
      }
    }
    checks.push_back({"lyapunov:" + s.name, monotone, monotone ? "non-increasing" : "increased"});
  }
  return checks;
}

std::vector<SuiteCheck> run_saturation_suite() {
  std::mt19937_64 rng(20240817);
  std::uniform_real_distribution<double> arg(-50.0, 50.0);
  std::uniform_real_distribution<double> lo(-10.0, 0.0);
  std::uniform_real_distribution<double> hi(0.0, 10.0);

  bool clamp_ok = true;
  bool shift_ok = true;
  bool flip_ok = true;
  for (int trial = 0; trial < 10000; ++trial) {
    Eigen::VectorXd x(1), eta(1), a(1), b(1);
    x[0] = arg(rng);
    eta[0] = arg(rng);
    a[0] = lo(rng);
    b[0] = std::max(hi(rng), a[0] + 1e-3);

    const double clamped = flownet::saturate(x, a, b)[0];
    if (clamped != std::min(std::max(x[0], a[0]), b[0])) clamp_ok = false;

    const double lhs = flownet::saturate(x - eta, a, b)[0] + eta[0];
    const double rhs = flownet::saturate(x, a + eta, b + eta)[0];
    const double scale = std::max({1.0, std::abs(x[0]), std::abs(eta[0])});
    if (std::abs(lhs - rhs) > scale * 2.3e-16) shift_ok = false;

    const double neg = flownet::saturate(-x, a, b)[0];
    const double mirrored = -flownet::saturate(x, -b, -a)[0];
    if (neg != mirrored) flip_ok = false;
  }
  return {{"saturation:clamp", clamp_ok, "bit-exact"},
          {"saturation:shift-identity", shift_ok, "within 1 ulp"},
          {"saturation:orientation-flip", flip_ok, "bit-exact"}};
}

std::vector<SuiteCheck> run_demo_suite() {
  std::vector<SuiteCheck> checks;
  const Scenario s = flownet::unbalanced_five_vertex();
  const flownet::Trajectory traj = flownet::integrate(s);
  checks.push_back({"demo:steady", traj.terminal.steady,
                    "max rate " + std::to_string(traj.terminal.max_rate)});
  checks.push_back({"demo:non-consensus", !traj.terminal.consensus, "spread persists"});
  Eigen::VectorXd expected(7);
  expected << 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 0.0;
  const double err = (traj.flow.back() - expected).cwiseAbs().maxCoeff();
  checks.push_back({"demo:pinned-flows", err <= 1e-3, "max error " + std::to_string(err)});
  return checks;
}

int cmd_verify(const std::string& suite, const Options& opt) {
  (void)opt;
  std::vector<SuiteCheck> checks;
  if (suite == "conservation") {
    checks = run_conservation_suite();
  } else if (suite == "lyapunov") {
    checks = run_lyapunov_suite();
  } else if (suite == "saturation") {
    checks = run_saturation_suite();
  } else if (suite == "demo") {
    checks = run_demo_suite();
  } else {
    throw std::invalid_argument(
        "unknown suite: " + suite + " (expected conservation, lyapunov, saturation or demo)");
  }
  bool all = true;
  for (const SuiteCheck& c : checks) {
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " - " << c.detail << "\n";
    all = all && c.pass;
  }
  std::cout << (all ? "verify: all checks passed" : "verify: FAILURES") << "\n";
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flow-network consensus simulator and analyzer"};
  app.require_subcommand(1);
  app.fallthrough();

  Options opt;
  app.add_flag("--pretty", opt.pretty, "Indent JSON reports");

  std::string scenario_path;
  std::string csv_path;
  std::string svg_path;
  std::string graph_path;
  std::string out_path = "counterexample.json";
  std::string suite;
  bool lyapunov = false;
  double tol_consensus = 0.0;
  double tol_rate = 0.0;

  CLI::App* analyze = app.add_subcommand("analyze", "Report graph predicates and the convergence verdict");
  analyze->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  analyze->add_option("--tol-consensus", tol_consensus, "Override the consensus tolerance");

  CLI::App* simulate = app.add_subcommand("simulate", "Integrate a scenario and report the terminal summary");
  simulate->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  simulate->add_option("--csv", csv_path, "Write the sampled trajectory as CSV");
  simulate->add_option("--svg", svg_path, "Write an SVG plot of the vertex states");
  simulate->add_flag("--lyapunov", lyapunov, "Include the Lyapunov column in the CSV");
  simulate->add_option("--tol-consensus", tol_consensus, "Override the consensus tolerance");
  simulate->add_option("--tol-rate", tol_rate, "Override the steady-state rate tolerance");

  CLI::App* match = app.add_subcommand("match", "Solve the disturbance matching equation");
  match->add_option("scenario", scenario_path, "Scenario JSON file")->required();

  CLI::App* counter = app.add_subcommand("counterexample",
                                         "Construct a non-consensus scenario for an unbalanced graph");
  counter->add_option("graph", graph_path, "Graph JSON file {\"n\": ..., \"edges\": [[t,h],...]}")
      ->required();
  counter->add_option("-o,--out", out_path, "Output scenario path");

  CLI::App* verify = app.add_subcommand("verify", "Run a named invariant suite");
  verify->add_option("--suite", suite, "conservation | lyapunov | saturation | demo")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (analyze->count("--tol-consensus")) opt.tol_consensus = tol_consensus;
  if (simulate->count("--tol-consensus")) opt.tol_consensus = tol_consensus;
  if (simulate->count("--tol-rate")) opt.tol_rate = tol_rate;

  try {
    if (app.got_subcommand(analyze)) return cmd_analyze(scenario_path, opt);
    if (app.got_subcommand(simulate)) {
      return cmd_simulate(scenario_path, csv_path, svg_path, lyapunov, opt);
    }
    if (app.got_subcommand(match)) return cmd_match(scenario_path, opt);
    if (app.got_subcommand(counter)) return cmd_counterexample(graph_path, out_path, opt);
    if (app.got_subcommand(verify)) return cmd_verify(suite, opt);
  } catch (const std::exception& e) {
    print_report(json{{"error", e.what()}}, opt.pretty);
    return 2;
  }
  return 2;
}
