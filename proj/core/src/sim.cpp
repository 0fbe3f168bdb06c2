#include "flownet/sim.hpp"

#include <cmath>

#include "flownet/analysis.hpp"

namespace flownet {

namespace {

double inf_norm(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

}  // namespace

bool detect_steady(const Scenario& s, const Eigen::VectorXd& x, const Eigen::VectorXd& xc,
                   double tol_rate) {
  const FlowRates rates = scenario_rhs(s, s.graph.incidence_matrix(), x, xc);
  return inf_norm(rates.x_dot) < tol_rate;
}

TerminalSummary summarize(const Scenario& s, const Eigen::VectorXd& x, const Eigen::VectorXd& xc) {
  const FlowRates rates = scenario_rhs(s, s.graph.incidence_matrix(), x, xc);
  const ConsensusCheck check =
      consensus_check(s.hamiltonian, x, s.integrator.consensus_tolerance());
  TerminalSummary summary;
  summary.max_rate = inf_norm(rates.x_dot);
  summary.steady = summary.max_rate < s.integrator.rate_tolerance();
  summary.consensus = check.consensus;
  summary.alpha = check.alpha;
  return summary;
}

Trajectory integrate(const Scenario& s) {
  s.validate();
  const Eigen::MatrixXd b = s.graph.incidence_matrix();
  const double h = s.integrator.step;
  const long long steps = std::llround(s.integrator.horizon / h);
  const int stride = s.integrator.stride;

  const auto lyapunov = lyapunov_for(s);

  Trajectory traj;
  traj.has_lyapunov = lyapunov.has_value();

  Eigen::VectorXd x = s.x0;
  Eigen::VectorXd xc = s.xc0;

  auto record = [&](double time) {
    const FlowRates rates = scenario_rhs(s, b, x, xc);
    traj.times.push_back(time);
    traj.x.push_back(x);
    traj.xc.push_back(xc);
    traj.flow.push_back(rates.flow);
    if (lyapunov) traj.lyapunov.push_back((*lyapunov)(x, xc));
  };

  record(0.0);
  for (long long k = 1; k <= steps; ++k) {
    const FlowRates k1 = scenario_rhs(s, b, x, xc);
    const FlowRates k2 = scenario_rhs(s, b, x + 0.5 * h * k1.x_dot, xc + 0.5 * h * k1.xc_dot);
    const FlowRates k3 = scenario_rhs(s, b, x + 0.5 * h * k2.x_dot, xc + 0.5 * h * k2.xc_dot);
    const FlowRates k4 = scenario_rhs(s, b, x + h * k3.x_dot, xc + h * k3.xc_dot);
    x += (h / 6.0) * (k1.x_dot + 2.0 * k2.x_dot + 2.0 * k3.x_dot + k4.x_dot);
    xc += (h / 6.0) * (k1.xc_dot + 2.0 * k2.xc_dot + 2.0 * k3.xc_dot + k4.xc_dot);

    const double time = static_cast<double>(k) * h;
    if (!x.allFinite() || !xc.allFinite() || inf_norm(x) > 1e12) {
      throw DivergenceError(time, "state diverged at t = " + std::to_string(time));
    }
    if (k % stride == 0 || k == steps) record(time);
  }

  traj.terminal = summarize(s, x, xc);
  return traj;
}

}  // namespace flownet
