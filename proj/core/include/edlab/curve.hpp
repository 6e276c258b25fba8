#pragma once

#include <Eigen/Dense>
#include <vector>

#include "edlab/grid.hpp"

namespace edlab::curve {

struct Breakpoint {
  double g = 0.0;     // total dispatch MW
  double cost = 0.0;  // $ at this dispatch
  Eigen::VectorXd profile;  // optimal per-generator dispatch, sums to g
};

// Piecewise-linear convex generation cost over [g_min, g_max]. Slopes are
// strictly increasing; equal-slope neighbours are merged at construction.
class CostCurve {
 public:
  // Validates ordering, convexity and continuity; merges equal slopes.
  static CostCurve from_breakpoints(std::vector<Breakpoint> bps,
                                    std::vector<double> slopes);

  double g_min() const { return bps_.front().g; }
  double g_max() const { return bps_.back().g; }

  const std::vector<Breakpoint>& breakpoints() const { return bps_; }
  const std::vector<double>& slopes() const { return slopes_; }

  // Cost at g; throws OutOfDomain outside [g_min, g_max].
  double eval(double g) const;

  // Marginal cost, extended as a total function: first slope below g_min,
  // last slope above g_max. At a breakpoint returns the right segment's
  // slope.
  double deriv(double g) const;

  // Interpolated optimal dispatch profile; throws OutOfDomain.
  Eigen::VectorXd profile(double g) const;

 private:
  CostCurve() = default;
  int segment_of(double g) const;

  std::vector<Breakpoint> bps_;
  std::vector<double> slopes_;  // one per segment, size bps_.size()-1
};

struct BuildStats {
  int lp_calls = 0;
  int max_depth = 0;
};

// Exact curve via the recursive dual-comparison construction: solve the
// endpoints, compare equality duals, intersect the two tangents, test the
// intersection against the true cost, then recurse or record a breakpoint.
CostCurve build_curve(const grid::Network& net, const Eigen::VectorXd& nodal_demand,
                      BuildStats* stats = nullptr);

// Network-free fast path: merit-order stacking of generator capacities.
// Equals build_curve on a line-unconstrained network.
CostCurve merit_order_curve(const std::vector<grid::Generator>& generators);

}  // namespace edlab::curve
