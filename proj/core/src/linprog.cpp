#include "flownet/linprog.hpp"

#include <stdexcept>
#include <vector>

namespace flownet {

namespace {

constexpr double kPivotTol = 1e-9;

// Tableau with one row per constraint plus an objective row; the last column
// is the right-hand side. `basis[i]` is the variable basic in row i.
struct Tableau {
  Eigen::MatrixXd t;
  std::vector<int> basis;
  int rows = 0;
  int cols = 0;  // structural + slack + artificial columns

  void pivot(int row, int col) {
    t.row(row) /= t(row, col);
    for (int i = 0; i <= rows; ++i) {
      if (i == row) continue;
      const double factor = t(i, col);
      if (factor != 0.0) t.row(i) -= factor * t.row(row);
    }
    basis[static_cast<size_t>(row)] = col;
  }

  // Runs simplex on the current objective row (maximization, reduced costs in
  // the last row). Returns false when the objective is unbounded. Bland's
  // rule keeps the iteration from cycling.
  bool iterate(const std::vector<bool>& usable) {
    while (true) {
      int entering = -1;
      for (int j = 0; j < cols; ++j) {
        if (usable[static_cast<size_t>(j)] && t(rows, j) < -kPivotTol) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return true;
      int leaving = -1;
      double best_ratio = 0.0;
      for (int i = 0; i < rows; ++i) {
        if (t(i, entering) > kPivotTol) {
          const double ratio = t(i, cols) / t(i, entering);
          if (leaving < 0 || ratio < best_ratio - kPivotTol ||
              (ratio < best_ratio + kPivotTol &&
               basis[static_cast<size_t>(i)] < basis[static_cast<size_t>(leaving)])) {
            leaving = i;
            best_ratio = ratio;
          }
        }
      }
      if (leaving < 0) return false;
      pivot(leaving, entering);
    }
  }

  void set_objective(const Eigen::VectorXd& costs) {
    t.row(rows).setZero();
    t.row(rows).head(costs.size()) = -costs.transpose();
    // make the row consistent with the current basis
    for (int i = 0; i < rows; ++i) {
      const int var = basis[static_cast<size_t>(i)];
      if (var < costs.size() && costs[var] != 0.0) {
        t.row(rows) += costs[var] * t.row(i);
      }
    }
  }
};

}  // namespace

LpResult solve_lp_max(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                      const Eigen::VectorXd& c) {
  const int mr = static_cast<int>(a.rows());
  const int nv = static_cast<int>(a.cols());
  if (b.size() != mr || c.size() != nv) {
    throw std::invalid_argument("solve_lp_max: inconsistent dimensions");
  }

  // Free variables are split as v = p - q; slacks turn rows into equalities.
  const int n_struct = 2 * nv;
  const int n_slack = mr;

  // Rows with negative rhs are negated, which flips their slack sign and
  // requires an artificial variable to form the initial basis.
  std::vector<int> artificial_rows;
  for (int i = 0; i < mr; ++i) {
    if (b[i] < 0.0) artificial_rows.push_back(i);
  }
  const int n_art = static_cast<int>(artificial_rows.size());
  const int cols = n_struct + n_slack + n_art;

  Tableau tab;
  tab.rows = mr;
  tab.cols = cols;
  tab.t = Eigen::MatrixXd::Zero(mr + 1, cols + 1);
  tab.basis.assign(static_cast<size_t>(mr), -1);

  int art = 0;
  for (int i = 0; i < mr; ++i) {
    const double sign = b[i] < 0.0 ? -1.0 : 1.0;
    for (int j = 0; j < nv; ++j) {
      tab.t(i, j) = sign * a(i, j);
      tab.t(i, nv + j) = -sign * a(i, j);
    }
    tab.t(i, n_struct + i) = sign;  // slack
    tab.t(i, cols) = sign * b[i];
    if (sign < 0.0) {
      tab.t(i, n_struct + n_slack + art) = 1.0;
      tab.basis[static_cast<size_t>(i)] = n_struct + n_slack + art;
      ++art;
    } else {
      tab.basis[static_cast<size_t>(i)] = n_struct + i;
    }
  }

  std::vector<bool> usable(static_cast<size_t>(cols), true);

  if (n_art > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(cols);
    phase1.tail(n_art).setConstant(-1.0);
    tab.set_objective(phase1);
    tab.iterate(usable);  // bounded by construction (objective <= 0)
    if (tab.t(mr, cols) < -1e-7) {
      return LpResult{LpResult::Status::Infeasible, Eigen::VectorXd::Zero(nv), 0.0};
    }
    // Pivot any artificial still in the basis out of it (degenerate rows).
    for (int i = 0; i < mr; ++i) {
      if (tab.basis[static_cast<size_t>(i)] >= n_struct + n_slack) {
        for (int j = 0; j < n_struct + n_slack; ++j) {
          if (std::abs(tab.t(i, j)) > kPivotTol) {
            tab.pivot(i, j);
            break;
          }
        }
      }
    }
    for (int j = n_struct + n_slack; j < cols; ++j) usable[static_cast<size_t>(j)] = false;
  }

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(cols);
  phase2.head(nv) = c;
  phase2.segment(nv, nv) = -c;
  tab.set_objective(phase2);
  if (!tab.iterate(usable)) {
    return LpResult{LpResult::Status::Unbounded, Eigen::VectorXd::Zero(nv), 0.0};
  }

  Eigen::VectorXd split = Eigen::VectorXd::Zero(n_struct);
  for (int i = 0; i < mr; ++i) {
    const int var = tab.basis[static_cast<size_t>(i)];
    if (var < n_struct) split[var] = tab.t(i, cols);
  }
  LpResult result;
  result.status = LpResult::Status::Optimal;
  result.solution = split.head(nv) - split.segment(nv, nv);
  result.objective = c.dot(result.solution);
  return result;
}

}  // namespace flownet
