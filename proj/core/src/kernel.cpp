#include "edlab/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "edlab/errors.hpp"

namespace edlab::kernel {

namespace {

double median3(double a, double b, double c) {
  return std::max(a, std::min(b, c));
}

}  // namespace

double stationarity(const curve::CostCurve& curve, const dist::DemandDistribution& d,
                    const dist::Penalties& pen, double g) {
  return curve.deriv(g) + dist::risk_deriv(d, g, pen);
}

DispatchResult optimal_dispatch(const curve::CostCurve& curve,
                                const dist::DemandDistribution& d,
                                const dist::Penalties& pen) {
  const double g_lo = curve.g_min();
  const double g_hi = curve.g_max();
  const double range = g_hi - g_lo;

  double g_star;
  if (range <= 0.0) {
    g_star = g_lo;
  } else if (stationarity(curve, d, pen, g_lo) >= 0.0) {
    g_star = g_lo;
  } else if (stationarity(curve, d, pen, g_hi) <= 0.0) {
    g_star = g_hi;
  } else {
    double lo = g_lo;
    double hi = g_hi;
    const double tol = range * 1e-12;
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;  // ran out of float resolution
      if (stationarity(curve, d, pen, mid) < 0.0)
        lo = mid;
      else
        hi = mid;
    }
    g_star = 0.5 * (lo + hi);
  }
  g_star = median3(g_lo, g_star, g_hi);

  DispatchResult res;
  res.g_total = g_star;
  res.profile = curve.profile(g_star);
  res.gen_cost = curve.eval(g_star);
  res.risk_cost = dist::risk(d, g_star, pen);
  res.task_loss = res.gen_cost + res.risk_cost;
  return res;
}

double extended_cost(const curve::CostCurve& curve, double g) {
  if (g < curve.g_min()) {
    return curve.eval(curve.g_min()) + curve.deriv(g) * (g - curve.g_min());
  }
  if (g > curve.g_max()) {
    return curve.eval(curve.g_max()) + curve.deriv(g) * (g - curve.g_max());
  }
  return curve.eval(g);
}

SampleLoss sample_loss_modelfree(const curve::CostCurve& curve, double g_hat,
                                 double d, const dist::Penalties& pen) {
  SampleLoss out;
  out.value = extended_cost(curve, g_hat) - extended_cost(curve, d);
  if (d > g_hat) out.value += pen.gamma1 * (d - g_hat);
  if (g_hat > d) out.value += pen.gamma2 * (g_hat - d);

  out.grad_g = curve.deriv(g_hat);
  if (d > g_hat) out.grad_g -= pen.gamma1;
  if (g_hat > d) out.grad_g += pen.gamma2;
  return out;
}

TaskSpecificLoss sample_loss_taskspecific(const curve::CostCurve& curve,
                                          const dist::DemandDistribution& hypothesis,
                                          double d, const dist::Penalties& pen) {
  if (hypothesis.family() == dist::Family::Empirical)
    throw EmpiricalNotDifferentiable(
        "task-specific loss needs a parametric hypothesis family");

  const DispatchResult disp = optimal_dispatch(curve, hypothesis, pen);
  const double g_hat = disp.g_total;
  const double range = curve.g_max() - curve.g_min();
  const double edge_tol = 1e-12 * std::max(1.0, range);

  TaskSpecificLoss out;
  out.g_hat = g_hat;
  const SampleLoss base = sample_loss_modelfree(curve, g_hat, d, pen);
  out.value = base.value;

  out.clamped = g_hat <= curve.g_min() + edge_tol || g_hat >= curve.g_max() - edge_tol;
  if (out.clamped) {
    out.grad_theta = Eigen::VectorXd::Zero(hypothesis.params().size());
    return out;
  }

  // Slope of the active segment; if the optimum straddles a breakpoint, use
  // the left segment so the fractile stays well defined.
  double lambda_seg = curve.deriv(g_hat);
  const double straddle = 1e-9 * std::max(1.0, range);
  for (const auto& bp : curve.breakpoints()) {
    if (std::abs(g_hat - bp.g) <= straddle) {
      lambda_seg = curve.deriv(bp.g - straddle);
      break;
    }
  }

  const double p =
      std::clamp((pen.gamma1 - lambda_seg) / (pen.gamma1 + pen.gamma2), 0.0, 1.0);
  const Eigen::VectorXd dg_dtheta = hypothesis.quantile_param_grad(p);
  out.grad_theta = base.grad_g * dg_dtheta;
  return out;
}

double performance_gap(const curve::CostCurve& curve,
                       const dist::DemandDistribution& dist_hat,
                       const std::vector<double>& true_demands,
                       const dist::Penalties& pen) {
  if (true_demands.empty())
    throw EmptyDataset("performance_gap needs demand samples");

  const double g_hat = optimal_dispatch(curve, dist_hat, pen).g_total;
  const dist::DemandDistribution truth = dist::DemandDistribution::empirical(true_demands);
  const double g_star = optimal_dispatch(curve, truth, pen).g_total;

  double acc = 0.0;
  for (double d : true_demands) {
    acc += sample_loss_modelfree(curve, g_hat, d, pen).value -
           sample_loss_modelfree(curve, g_star, d, pen).value;
  }
  return std::abs(acc / static_cast<double>(true_demands.size()));
}

}  // namespace edlab::kernel
