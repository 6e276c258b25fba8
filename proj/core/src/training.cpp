#include <functional>
#include <numeric>

#include "edlab/errors.hpp"
#include "edlab/learn.hpp"

namespace edlab::learn {

namespace {

struct LossEval {
  double value = 0.0;
  Eigen::VectorXd d_raw;  // gradient of value in the raw network outputs
};

using LossFn = std::function<LossEval(const Eigen::VectorXd&, const data::Sample&)>;

double validation_loss(const Mlp& mlp, const Eigen::MatrixXd& x,
                       const data::SampleSet& samples, const LossFn& loss) {
  const Eigen::MatrixXd raw = mlp.forward_batch(x);
  double acc = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j)
    acc += loss(raw.col(static_cast<Eigen::Index>(j)), samples[j]).value;
  return acc / static_cast<double>(samples.size());
}

TrainOutcome train_generic(const data::SampleSet& train, const data::SampleSet& val,
                           const TrainConfig& cfg, Framework framework,
                           const LossFn& loss) {
  if (train.empty() || val.empty())
    throw EmptyDataset("training needs nonempty train and validation sets");

  Rng rng(cfg.seed);
  Predictor current;
  current.framework = framework;
  current.hypothesis_family = cfg.hypothesis_family;
  current.norm = fit_normalization(train);

  std::vector<int> sizes;
  sizes.push_back(static_cast<int>(train.front().features.size()));
  for (int h : cfg.hidden) sizes.push_back(h);
  sizes.push_back(Predictor::head_size(framework, cfg.hypothesis_family));
  current.mlp = Mlp(sizes, rng);

  const Eigen::MatrixXd x_train = current.normalize_batch(train);
  const Eigen::MatrixXd x_val = current.normalize_batch(val);

  Adam adam(current.mlp, cfg.learning_rate);

  TrainOutcome out;
  out.best_val_loss = validation_loss(current.mlp, x_val, val, loss);
  out.val_history.push_back(out.best_val_loss);
  out.predictor = current;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  const int head = current.mlp.output_size();
  int since_best = 0;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const auto bsz = static_cast<Eigen::Index>(stop - start);
      Eigen::MatrixXd xb(x_train.rows(), bsz);
      for (Eigen::Index j = 0; j < bsz; ++j)
        xb.col(j) = x_train.col(static_cast<Eigen::Index>(order[start + j]));

      Mlp::Trace trace;
      const Eigen::MatrixXd raw = current.mlp.forward_batch(xb, &trace);
      Eigen::MatrixXd upstream(head, bsz);
      for (Eigen::Index j = 0; j < bsz; ++j) {
        const LossEval le = loss(raw.col(j), train[order[start + j]]);
        upstream.col(j) = le.d_raw / static_cast<double>(bsz);
      }
      adam.step(current.mlp, current.mlp.backward_batch(trace, upstream));
    }

    const double v = validation_loss(current.mlp, x_val, val, loss);
    out.val_history.push_back(v);
    out.epochs_run = epoch;
    if (v < out.best_val_loss) {
      out.best_val_loss = v;
      out.predictor = current;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  return out;
}

}  // namespace

TrainOutcome train_mse(const data::SampleSet& train, const data::SampleSet& val,
                       const TrainConfig& cfg) {
  TrainConfig local = cfg;
  local.framework = Framework::Mse;
  Normalization norm = fit_normalization(train);
  const double t_mean = norm.target_mean;
  const double t_scale = norm.target_scale;

  LossFn loss = [t_mean, t_scale](const Eigen::VectorXd& raw, const data::Sample& s) {
    LossEval le;
    const double yhat = t_mean + t_scale * raw[0];
    const double err = yhat - s.target;
    le.value = err * err;
    le.d_raw = Eigen::VectorXd::Constant(1, 2.0 * err * t_scale);
    return le;
  };
  return train_generic(train, val, local, Framework::Mse, loss);
}

TrainOutcome train_taskspecific(const data::SampleSet& train,
                                const data::SampleSet& val,
                                const CurveProvider& curves,
                                const dist::Penalties& pen, const TrainConfig& cfg) {
  TrainConfig local = cfg;
  local.framework = Framework::TaskSpecific;
  Normalization norm = fit_normalization(train);
  const DistributionHead head{cfg.hypothesis_family, norm.target_mean,
                              norm.target_scale};

  LossFn loss = [&curves, &pen, head](const Eigen::VectorXd& raw,
                                      const data::Sample& s) {
    const auto& curve = curves.at(s.target);
    const dist::DemandDistribution hypothesis = head.distribution(raw);
    const kernel::TaskSpecificLoss tsl =
        kernel::sample_loss_taskspecific(curve, hypothesis, s.target, pen);
    LossEval le;
    le.value = tsl.value;
    le.d_raw = head.jacobian(raw).transpose() * tsl.grad_theta;
    return le;
  };
  return train_generic(train, val, local, Framework::TaskSpecific, loss);
}

TrainOutcome train_modelfree(const data::SampleSet& train, const data::SampleSet& val,
                             const CurveProvider& curves, const dist::Penalties& pen,
                             const TrainConfig& cfg) {
  TrainConfig local = cfg;
  local.framework = Framework::ModelFree;
  Normalization norm = fit_normalization(train);
  const double t_mean = norm.target_mean;
  const double t_scale = norm.target_scale;

  LossFn loss = [&curves, &pen, t_mean, t_scale](const Eigen::VectorXd& raw,
                                                 const data::Sample& s) {
    const auto& curve = curves.at(s.target);
    const double g_raw = t_mean + t_scale * raw[0];
    const double g_hat = std::max(curve.g_min(), std::min(g_raw, curve.g_max()));
    const kernel::SampleLoss sl =
        kernel::sample_loss_modelfree(curve, g_hat, s.target, pen);
    LossEval le;
    le.value = sl.value;
    const bool clamped = g_raw < curve.g_min() || g_raw > curve.g_max();
    le.d_raw = Eigen::VectorXd::Constant(1, clamped ? 0.0 : sl.grad_g * t_scale);
    return le;
  };
  return train_generic(train, val, local, Framework::ModelFree, loss);
}

}  // namespace edlab::learn
