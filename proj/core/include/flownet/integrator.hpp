#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <vector>

namespace flownet {

struct IntegratorParams {
  double step = 0.01;
  double horizon = 100.0;
  int stride = 10;
  std::optional<double> tol_rate;       // steady-state threshold on ||xdot||_inf
  std::optional<double> tol_consensus;  // gradient-spread threshold

  double rate_tolerance() const { return tol_rate.value_or(1e-6); }
  double consensus_tolerance() const { return tol_consensus.value_or(1e-4); }
  void validate() const;
};

struct TerminalSummary {
  bool steady = false;
  bool consensus = false;
  double alpha = 0.0;
  double max_rate = 0.0;
};

/// Time-sampled record of one run. Parallel arrays indexed by sample; xc is
/// empty-per-sample for proportional control, lyapunov is populated only when
/// the scenario admits a Lyapunov function.
struct Trajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> x;
  std::vector<Eigen::VectorXd> xc;
  std::vector<Eigen::VectorXd> flow;
  std::vector<double> lyapunov;
  bool has_lyapunov = false;
  TerminalSummary terminal;

  size_t samples() const { return times.size(); }
};

/// Raised when a state leaves the finite range during integration.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(double time, const std::string& what)
      : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

}  // namespace flownet
