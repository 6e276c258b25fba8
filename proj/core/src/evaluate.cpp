#include <cmath>
#include <vector>

#include "edlab/errors.hpp"
#include "edlab/learn.hpp"
#include "edlab/parallel.hpp"

namespace edlab::learn {

namespace {

double clamp_to_domain(const curve::CostCurve& c, double g) {
  return std::max(c.g_min(), std::min(g, c.g_max()));
}

}  // namespace

EvalMetrics evaluate(const Predictor& predictor, const data::SampleSet& test,
                     const CurveProvider& curves, const dist::Penalties& pen) {
  if (test.empty()) throw EmptyDataset("evaluate needs a nonempty test set");

  std::vector<double> cost(test.size());
  std::vector<double> sqerr(test.size());

  parallel_for(test.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const data::Sample& s = test[i];
      const curve::CostCurve& c = curves.at(s.target);
      double prediction;  // what this framework calls its load/dispatch guess
      double g_hat;
      switch (predictor.framework) {
        case Framework::Mse: {
          prediction = predictor.predict_scalar(s.features);
          g_hat = clamp_to_domain(c, prediction);
          break;
        }
        case Framework::ModelFree: {
          g_hat = clamp_to_domain(c, predictor.predict_scalar(s.features));
          prediction = g_hat;
          break;
        }
        case Framework::TaskSpecific: {
          const dist::DemandDistribution hyp =
              predictor.predict_distribution(s.features);
          g_hat = kernel::optimal_dispatch(c, hyp, pen).g_total;
          prediction = g_hat;
          break;
        }
        default: {  // Oracle: dispatch the realized demand
          g_hat = clamp_to_domain(c, s.target);
          prediction = s.target;
          break;
        }
      }
      cost[i] = kernel::sample_loss_modelfree(c, g_hat, s.target, pen).value;
      const double err = prediction - s.target;
      sqerr[i] = err * err;
    }
  });

  // Aggregate per period, then derive the overall numbers from the period
  // sums so the weighted averages reconcile exactly.
  std::array<double, 4> sum_cost{}, sum_cost_sq{}, sum_sqerr{};
  std::array<int, 4> count{};
  for (std::size_t i = 0; i < test.size(); ++i) {
    const int p = test[i].hour / 6;
    sum_cost[p] += cost[i];
    sum_cost_sq[p] += cost[i] * cost[i];
    sum_sqerr[p] += sqerr[i];
    count[p] += 1;
  }

  EvalMetrics m;
  double tot_cost = 0.0, tot_cost_sq = 0.0, tot_sqerr = 0.0;
  for (int p = 0; p < 4; ++p) {
    m.periods[p].count = count[p];
    if (count[p] > 0) {
      const double n = count[p];
      m.periods[p].mse = sum_sqerr[p] / n;
      m.periods[p].cost_loss = sum_cost[p] / n;
      m.periods[p].cost_loss_std = std::sqrt(std::max(
          0.0, sum_cost_sq[p] / n - (sum_cost[p] / n) * (sum_cost[p] / n)));
    }
    tot_cost += sum_cost[p];
    tot_cost_sq += sum_cost_sq[p];
    tot_sqerr += sum_sqerr[p];
  }
  m.count = static_cast<int>(test.size());
  const double n = static_cast<double>(m.count);
  m.mse = tot_sqerr / n;
  m.cost_loss = tot_cost / n;
  m.cost_loss_std =
      std::sqrt(std::max(0.0, tot_cost_sq / n - (tot_cost / n) * (tot_cost / n)));
  return m;
}

}  // namespace edlab::learn
