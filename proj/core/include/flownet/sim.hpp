#pragma once

#include "flownet/integrator.hpp"
#include "flownet/scenario.hpp"

namespace flownet {

/// Classical fixed-step fourth-order Runge-Kutta over [0, horizon], sampling
/// every `stride` steps plus the final state. The horizon is rounded to a
/// whole number of steps. Records realized flows at every sample and the
/// applicable Lyapunov value when the scenario admits one. Throws
/// DivergenceError when a state leaves the finite range (||x||_inf > 1e12).
Trajectory integrate(const Scenario& s);

/// True iff the infinity norm of xdot, re-evaluated from the scenario
/// right-hand side at (x, xc), is below tol_rate. The controller state may
/// keep ramping at a pinned equilibrium, so steadiness is judged on x alone.
bool detect_steady(const Scenario& s, const Eigen::VectorXd& x, const Eigen::VectorXd& xc,
                   double tol_rate);

/// Steady/consensus flags, consensus value and terminal rate for a state,
/// using the scenario's tolerances.
TerminalSummary summarize(const Scenario& s, const Eigen::VectorXd& x, const Eigen::VectorXd& xc);

}  // namespace flownet
