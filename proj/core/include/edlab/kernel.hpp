#pragma once

#include <Eigen/Dense>

#include "edlab/curve.hpp"
#include "edlab/dist.hpp"

namespace edlab::kernel {

struct DispatchResult {
  double g_total = 0.0;
  Eigen::VectorXd profile;
  double gen_cost = 0.0;   // C_t(g_total)
  double risk_cost = 0.0;  // expected mismatch penalty
  double task_loss = 0.0;  // gen_cost + risk_cost
};

struct SampleLoss {
  double value = 0.0;   // $ regret against serving the realized demand
  double grad_g = 0.0;  // subgradient in the dispatched total
};

// Stationarity function D(g) = C'(g) + R'(g); nondecreasing in g.
double stationarity(const curve::CostCurve& curve, const dist::DemandDistribution& d,
                    const dist::Penalties& pen, double g);

// Unique minimizer of C(g) + R(g) over [g_min, g_max] by bisection on the
// monotone derivative, clamped through the median operator.
DispatchResult optimal_dispatch(const curve::CostCurve& curve,
                                const dist::DemandDistribution& d,
                                const dist::Penalties& pen);

// Generation cost extended linearly beyond [g_min, g_max] with the clamped
// end slopes, so the regret stays finite for out-of-range demand.
double extended_cost(const curve::CostCurve& curve, double g);

// Q_t(g_hat, d) = C(g_hat) - C(d) + gamma1 (d-g_hat)+ + gamma2 (g_hat-d)+
// and its subgradient in g_hat (right-slope convention at kinks; both
// indicator terms vanish at the g_hat = d tie).
SampleLoss sample_loss_modelfree(const curve::CostCurve& curve, double g_hat,
                                 double d, const dist::Penalties& pen);

struct TaskSpecificLoss {
  double value = 0.0;
  Eigen::VectorXd grad_theta;  // d value / d distribution params
  double g_hat = 0.0;
  bool clamped = false;
};

// Dispatches optimally for the hypothesis distribution, evaluates the task
// loss at the realized demand, and differentiates it through the first-order
// condition: within the active segment g_hat is the (gamma1-lambda)/(gamma1+
// gamma2) quantile, so d g_hat/d theta is the quantile's parameter gradient;
// a clamped dispatch carries zero sensitivity.
TaskSpecificLoss sample_loss_taskspecific(const curve::CostCurve& curve,
                                          const dist::DemandDistribution& hypothesis,
                                          double d, const dist::Penalties& pen);

// Mean regret of dispatching with the hypothesis distribution instead of the
// empirical optimum of the realized demands. Nonnegative up to bisection
// tolerance.
double performance_gap(const curve::CostCurve& curve,
                       const dist::DemandDistribution& dist_hat,
                       const std::vector<double>& true_demands,
                       const dist::Penalties& pen);

}  // namespace edlab::kernel
