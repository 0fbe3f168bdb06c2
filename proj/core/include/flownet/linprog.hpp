#pragma once

#include <Eigen/Dense>

namespace flownet {

/// Outcome of a small dense linear program.
struct LpResult {
  enum class Status { Optimal, Infeasible, Unbounded };
  Status status = Status::Infeasible;
  Eigen::VectorXd solution;
  double objective = 0.0;
};

/// Maximize c.v subject to A v <= b with free variables v.
///
/// Two-phase tableau simplex with Bland's rule; intended for the tiny,
/// well-scaled feasibility problems that show up here (tens of rows).
LpResult solve_lp_max(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                      const Eigen::VectorXd& c);

}  // namespace flownet
