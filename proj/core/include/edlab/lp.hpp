#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "edlab/grid.hpp"

namespace edlab::lp {

// One two-sided inequality row: lower <= coeffs . x <= upper.
// Either side may be infinite.
struct RowBound {
  Eigen::VectorXd coeffs;
  double lower;
  double upper;
};

struct EqRow {
  Eigen::VectorXd coeffs;
  double target;
};

// min cost.x  s.t.  lower <= x <= upper (finite box),
//                   row bounds, and optionally eq.coeffs.x == eq.target.
struct LpProblem {
  Eigen::VectorXd cost;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<RowBound> rows;
  std::optional<EqRow> eq;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
  // Lagrangian multiplier of the equality row: d(objective)/d(target).
  double eq_dual = 0.0;
  LpStatus status = LpStatus::Infeasible;
  int iterations = 0;
};

// Dense bounded-variable primal simplex (two phases, Bland fallback for
// anti-cycling). Deterministic: identical problems produce identical
// solutions. Throws NumericalFailure if the pivoting breaks down;
// infeasibility is reported through status, not an exception.
LpSolution solve(const LpProblem& problem);

// The economic dispatch cost LP C_t(g_target): generator costs, capacity
// boxes, line limits at the given nodal demand, and the total-generation
// equality row.
LpProblem dispatch_problem(const grid::Network& net,
                           const Eigen::VectorXd& nodal_demand, double g_target);

// Range of achievable total generation under constraints (2)-(3).
// Throws Infeasible when the line limits cannot be met by any dispatch.
std::pair<double, double> feasible_range(const grid::Network& net,
                                         const Eigen::VectorXd& nodal_demand);

}  // namespace edlab::lp
