#include "edlab/curve.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "edlab/errors.hpp"
#include "edlab/lp.hpp"

namespace edlab::curve {

namespace {

double domain_tol(double lo, double hi) {
  return 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
}

}  // namespace

CostCurve CostCurve::from_breakpoints(std::vector<Breakpoint> bps,
                                      std::vector<double> slopes) {
  if (bps.empty()) throw InvalidParams("curve needs at least one breakpoint");
  if (slopes.size() + 1 != bps.size())
    throw InvalidParams("curve slope count must be breakpoints-1");

  for (std::size_t k = 0; k + 1 < bps.size(); ++k) {
    if (!(bps[k].g < bps[k + 1].g))
      throw NumericalFailure("curve breakpoints not strictly increasing");
  }
  for (const auto& bp : bps) {
    if (bp.profile.size() > 0) {
      const double sum = bp.profile.sum();
      if (std::abs(sum - bp.g) > 1e-8 * std::max(1.0, std::abs(bp.g)))
        throw NumericalFailure("breakpoint profile does not sum to its dispatch");
    }
  }

  // Merge equal-slope neighbours so the representation is canonical.
  std::vector<Breakpoint> merged;
  std::vector<double> mslopes;
  merged.push_back(std::move(bps.front()));
  for (std::size_t k = 0; k < slopes.size(); ++k) {
    const double eps =
        1e-6 * std::max({1.0, std::abs(slopes[k]),
                         mslopes.empty() ? 0.0 : std::abs(mslopes.back())});
    if (!mslopes.empty() && std::abs(slopes[k] - mslopes.back()) <= eps) {
      // Same marginal cost: extend the previous segment, recomputing the
      // chord so continuity stays exact.
      mslopes.back() = (bps[k + 1].cost - merged[merged.size() - 2].cost) /
                       (bps[k + 1].g - merged[merged.size() - 2].g);
      merged.back() = std::move(bps[k + 1]);
    } else {
      mslopes.push_back(slopes[k]);
      merged.push_back(std::move(bps[k + 1]));
    }
  }

  for (std::size_t k = 0; k + 1 < mslopes.size(); ++k) {
    if (!(mslopes[k + 1] > mslopes[k]))
      throw NumericalFailure("curve slopes are not increasing");
  }
  for (std::size_t k = 0; k + 1 < merged.size(); ++k) {
    const double expect = merged[k].cost + mslopes[k] * (merged[k + 1].g - merged[k].g);
    const double tol = 1e-7 * std::max({1.0, std::abs(merged[k].cost),
                                        std::abs(merged[k + 1].cost)});
    if (std::abs(expect - merged[k + 1].cost) > tol)
      throw NumericalFailure("curve cost discontinuity across a breakpoint");
  }

  CostCurve c;
  c.bps_ = std::move(merged);
  c.slopes_ = std::move(mslopes);
  return c;
}

int CostCurve::segment_of(double g) const {
  // Segment k covers [g_k, g_{k+1}); the last covers up to g_max inclusive.
  int lo = 0;
  int hi = static_cast<int>(slopes_.size()) - 1;
  while (lo < hi) {
    const int mid = (lo + hi + 1) / 2;
    if (g >= bps_[mid].g)
      lo = mid;
    else
      hi = mid - 1;
  }
  return lo;
}

double CostCurve::eval(double g) const {
  const double tol = domain_tol(g_min(), g_max());
  if (g < g_min() - tol || g > g_max() + tol)
    throw OutOfDomain("curve eval outside [g_min, g_max]");
  g = std::clamp(g, g_min(), g_max());
  if (slopes_.empty()) return bps_.front().cost;
  const int k = segment_of(g);
  return bps_[k].cost + slopes_[k] * (g - bps_[k].g);
}

double CostCurve::deriv(double g) const {
  if (slopes_.empty()) return 0.0;
  if (g <= g_min()) return slopes_.front();
  if (g >= g_max()) return slopes_.back();
  return slopes_[segment_of(g)];
}

Eigen::VectorXd CostCurve::profile(double g) const {
  const double tol = domain_tol(g_min(), g_max());
  if (g < g_min() - tol || g > g_max() + tol)
    throw OutOfDomain("curve profile outside [g_min, g_max]");
  g = std::clamp(g, g_min(), g_max());
  if (slopes_.empty()) return bps_.front().profile;
  const int k = segment_of(g);
  if (g == bps_[k].g) return bps_[k].profile;
  const double gamma = (g - bps_[k].g) / (bps_[k + 1].g - bps_[k].g);
  return (1.0 - gamma) * bps_[k].profile + gamma * bps_[k + 1].profile;
}

namespace {

struct NodeSolve {
  double cost = 0.0;
  double dual = 0.0;
  Eigen::VectorXd profile;
};

struct Segment {
  double lo = 0.0;
  double hi = 0.0;
  double slope = 0.0;
};

class CurveBuilder {
 public:
  CurveBuilder(const grid::Network& net, const Eigen::VectorXd& demand,
               BuildStats* stats)
      : net_(net), demand_(demand), stats_(stats) {}

  CostCurve build() {
    auto [g_lo, g_hi] = lp::feasible_range(net_, demand_);
    bump_lp(2);
    range_ = g_hi - g_lo;

    if (range_ <= 1e-12 * std::max(1.0, std::abs(g_hi))) {
      NodeSolve s = solve_at(g_lo);
      return CostCurve::from_breakpoints({{g_lo, s.cost, s.profile}}, {});
    }
    delta_ = 1e-7 * range_;

    NodeSolve lo = solve_at(g_lo);
    NodeSolve hi = solve_at(g_hi);
    const double lambda_lo = solve_at(g_lo + delta_).dual;
    const double lambda_hi = solve_at(g_hi - delta_).dual;
    points_[g_lo] = lo;
    points_[g_hi] = hi;

    recurse(g_lo, lo.cost, lambda_lo, g_hi, hi.cost, lambda_hi, 0);
    return finalize(g_lo, g_hi);
  }

 private:
  void bump_lp(int n) {
    if (stats_) stats_->lp_calls += n;
  }

  NodeSolve solve_at(double g) {
    bump_lp(1);
    lp::LpSolution sol = lp::solve(lp::dispatch_problem(net_, demand_, g));
    if (sol.status != lp::LpStatus::Optimal)
      throw Infeasible("dispatch LP infeasible inside the feasible range");
    return {sol.objective, sol.eq_dual, sol.x};
  }

  static double lambda_eps(double a, double b) {
    return 1e-6 * std::max({1.0, std::abs(a), std::abs(b)});
  }

  void recurse(double gx, double cx, double lx, double gy, double cy, double ly,
               int depth) {
    if (depth > 64)
      throw RecursionDepthExceeded("curve recursion exceeded 64 levels");
    if (stats_) stats_->max_depth = std::max(stats_->max_depth, depth);

    const double width = gy - gx;
    if (width <= 4.0 * delta_) {
      segments_.push_back({gx, gy, (cy - cx) / width});
      return;
    }
    if (std::abs(lx - ly) <= lambda_eps(lx, ly)) {
      segments_.push_back({gx, gy, lx});
      return;
    }

    // Intersect the two endpoint tangents.
    const double gz = (cy - cx + lx * gx - ly * gy) / (lx - ly);
    const double cz = cx + lx * (gz - gx);
    if (gz <= gx + 2.0 * delta_ || gz >= gy - 2.0 * delta_) {
      // Intersection collapsed onto an endpoint: numerical noise on an
      // effectively linear stretch.
      segments_.push_back({gx, gy, 0.5 * (lx + ly)});
      return;
    }

    NodeSolve sz = solve_at(gz);
    points_[gz] = sz;
    if (std::abs(cz - sz.cost) <= 1e-7 * std::max(1.0, std::abs(cz))) {
      // gz is the unique breaking point in [gx, gy].
      segments_.push_back({gx, gz, lx});
      segments_.push_back({gz, gy, ly});
      return;
    }

    const double lz_left = solve_at(gz - delta_).dual;
    const double lz_right = solve_at(gz + delta_).dual;
    recurse(gx, cx, lx, gz, sz.cost, lz_left, depth + 1);
    recurse(gz, sz.cost, lz_right, gy, cy, ly, depth + 1);
  }

  CostCurve finalize(double g_lo, double g_hi) {
    std::sort(segments_.begin(), segments_.end(),
              [](const Segment& a, const Segment& b) { return a.lo < b.lo; });

    // Keep a boundary only where the marginal cost actually changes.
    std::vector<double> knots{g_lo};
    for (std::size_t i = 0; i + 1 < segments_.size(); ++i) {
      const double eps = lambda_eps(segments_[i].slope, segments_[i + 1].slope);
      if (std::abs(segments_[i + 1].slope - segments_[i].slope) > eps)
        knots.push_back(segments_[i].hi);
    }
    knots.push_back(g_hi);

    std::vector<Breakpoint> bps;
    for (double g : knots) {
      auto it = points_.find(g);
      if (it == points_.end()) {
        NodeSolve s = solve_at(g);
        it = points_.emplace(g, std::move(s)).first;
      }
      bps.push_back({g, it->second.cost, it->second.profile});
    }
    std::vector<double> slopes;
    for (std::size_t k = 0; k + 1 < bps.size(); ++k)
      slopes.push_back((bps[k + 1].cost - bps[k].cost) / (bps[k + 1].g - bps[k].g));
    return CostCurve::from_breakpoints(std::move(bps), std::move(slopes));
  }

  const grid::Network& net_;
  const Eigen::VectorXd& demand_;
  BuildStats* stats_;
  double range_ = 0.0;
  double delta_ = 0.0;
  std::map<double, NodeSolve> points_;
  std::vector<Segment> segments_;
};

}  // namespace

CostCurve build_curve(const grid::Network& net, const Eigen::VectorXd& nodal_demand,
                      BuildStats* stats) {
  if (nodal_demand.size() != net.n_load())
    throw DimensionMismatch("build_curve: demand length != load count");
  if (net.n_gen() == 0) throw InvalidParams("build_curve: network has no generators");
  if (stats) *stats = BuildStats{};
  return CurveBuilder(net, nodal_demand, stats).build();
}

CostCurve merit_order_curve(const std::vector<grid::Generator>& generators) {
  if (generators.empty())
    throw InvalidParams("merit_order_curve: empty generator list");
  const int n = static_cast<int>(generators.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return generators[a].marginal_cost < generators[b].marginal_cost;
  });

  std::vector<Breakpoint> bps;
  std::vector<double> slopes;
  Eigen::VectorXd profile = Eigen::VectorXd::Zero(n);
  double g = 0.0;
  double cost = 0.0;
  bps.push_back({g, cost, profile});
  for (int idx : order) {
    const auto& gen = generators[idx];
    if (gen.capacity_mw <= 0.0) continue;
    g += gen.capacity_mw;
    cost += gen.marginal_cost * gen.capacity_mw;
    profile[idx] = gen.capacity_mw;
    bps.push_back({g, cost, profile});
    slopes.push_back(gen.marginal_cost);
  }
  return CostCurve::from_breakpoints(std::move(bps), std::move(slopes));
}

}  // namespace edlab::curve
