#pragma once

#include <Eigen/Dense>

#include "flownet/graph.hpp"

namespace flownet {

/// Storage energy at the vertices: plain quadratic (H = ||x||^2 / 2) or
/// weighted quadratic (H = sum_i w_i x_i^2 / 2 with w_i > 0), so the Hessian
/// is always positive definite.
class Hamiltonian {
 public:
  static Hamiltonian quadratic(int dim);
  static Hamiltonian weighted(Eigen::VectorXd weights);

  double value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  Eigen::VectorXd hessian_diagonal() const;

  int dim() const { return dim_; }
  bool is_weighted() const { return weighted_; }
  const Eigen::VectorXd& weights() const { return weights_; }

 private:
  Hamiltonian(int dim, bool weighted, Eigen::VectorXd weights);
  int dim_;
  bool weighted_;
  Eigen::VectorXd weights_;  // empty for the plain quadratic
};

/// Constant in/outflows: E has one +1 (inflow) or -1 (outflow) per column,
/// rates holds the corresponding magnitudes.
struct DisturbanceModel {
  Eigen::MatrixXd terminals;  // n x k
  Eigen::VectorXd rates;      // k

  Eigen::VectorXd net_injection() const { return terminals * rates; }
  void validate(int vertex_count) const;
};

struct ControllerSpec {
  enum class Kind { Proportional, PI, SaturatedPI };
  Kind kind = Kind::PI;
  Eigen::VectorXd gains;  // diagonal gains for Proportional/PI; SaturatedPI fixes them to 1

  bool has_edge_state() const { return kind != Kind::Proportional; }
  void validate(int edge_count) const;
};

/// Componentwise clamp of x into [lower, upper].
Eigen::VectorXd saturate(const Eigen::VectorXd& x, const Eigen::VectorXd& lower,
                         const Eigen::VectorXd& upper);

/// Componentwise antiderivative of the clamp, normalized so the value on the
/// linear band is x^2/2. For lower <= 0 <= upper this is the integral of the
/// clamp from 0, hence nonnegative, convex and C1.
Eigen::VectorXd saturation_integral(const Eigen::VectorXd& x, const Eigen::VectorXd& lower,
                                    const Eigen::VectorXd& upper);

/// State rates plus the realized edge flow producing them.
struct FlowRates {
  Eigen::VectorXd x_dot;
  Eigen::VectorXd xc_dot;  // empty for proportional control
  Eigen::VectorXd flow;
};

/// xdot = -B R B^T dH/dx + injection, flow = -R B^T dH/dx.
FlowRates rhs_proportional(const Eigen::MatrixXd& incidence, const Hamiltonian& h,
                           const Eigen::VectorXd& gains, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& injection);

/// xdot = -B R B^T dH/dx - B xc + injection, xc_dot = B^T dH/dx.
FlowRates rhs_pi(const Eigen::MatrixXd& incidence, const Hamiltonian& h,
                 const Eigen::VectorXd& gains, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& xc, const Eigen::VectorXd& injection);

/// xdot = B sat(-B^T dH/dx - xc; lower, upper) + injection,
/// xc_dot = B^T dH/dx. The clamp output is the realized flow.
FlowRates rhs_pi_saturated(const Eigen::MatrixXd& incidence, const Hamiltonian& h,
                           const FlowConstraints& constraints, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& xc, const Eigen::VectorXd& injection);

}  // namespace flownet
