#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "edlab/curve.hpp"
#include "edlab/data.hpp"
#include "edlab/dist.hpp"
#include "edlab/grid.hpp"
#include "edlab/kernel.hpp"
#include "edlab/mlp.hpp"

namespace edlab::learn {

enum class Framework { Mse, TaskSpecific, ModelFree, Oracle };

std::string framework_name(Framework f);
Framework framework_from_name(const std::string& name);

struct TrainConfig {
  Framework framework = Framework::Mse;
  dist::Family hypothesis_family = dist::Family::Normal;
  double learning_rate = 1e-3;
  int batch_size = 32;
  int max_epochs = 500;
  int patience = 10;
  std::uint64_t seed = 1;
  std::vector<int> hidden = {128, 128};
};

// z-score stats from the training split; the target scale also conditions
// the output heads so the net works in normalized units.
struct Normalization {
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_scale;
  double target_mean = 0.0;
  double target_scale = 1.0;
};

Normalization fit_normalization(const data::SampleSet& train);

// Trained predictor: the net, the framework head it was trained for, and
// the frozen normalization stats.
class Predictor {
 public:
  Framework framework = Framework::Mse;
  dist::Family hypothesis_family = dist::Family::Normal;
  Mlp mlp;
  Normalization norm;

  Eigen::VectorXd normalize(const Eigen::VectorXd& features) const;
  Eigen::MatrixXd normalize_batch(const data::SampleSet& samples) const;

  // Scalar heads (Mse: load prediction; ModelFree: dispatch before clamping).
  double predict_scalar(const Eigen::VectorXd& features) const;
  // Distribution head for the task-specific framework.
  dist::DemandDistribution predict_distribution(const Eigen::VectorXd& features) const;

  static int head_size(Framework f, dist::Family family);

  std::string to_json_text() const;
  static Predictor from_json_text(const std::string& text);
  void save(const std::string& path) const;
  static Predictor load(const std::string& path);
};

// Maps raw network outputs to distribution params per family and chains
// gradients back; used by training and by predict_distribution.
struct DistributionHead {
  dist::Family family;
  double target_mean;
  double target_scale;

  dist::DemandDistribution distribution(const Eigen::VectorXd& raw) const;
  // rows: params, cols: raw outputs -> d params / d raw
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& raw) const;
};

enum class CurveMode { FixedMean, PerSlot };

// Hands out the cost curve for a sample: either one curve built at the mean
// training demand, or per-slot curves built at each realized demand (cached,
// thread safe).
class CurveProvider {
 public:
  CurveProvider(const grid::Network& net, CurveMode mode, double mean_total_demand);

  const curve::CostCurve& at(double realized_total_demand) const;
  const curve::CostCurve& fixed() const { return fixed_; }
  CurveMode mode() const { return mode_; }
  const grid::Network& network() const { return *net_; }

 private:
  const grid::Network* net_;
  CurveMode mode_;
  curve::CostCurve fixed_;
  mutable std::unordered_map<std::int64_t, std::unique_ptr<curve::CostCurve>> cache_;
  mutable std::mutex mu_;
};

struct TrainOutcome {
  Predictor predictor;
  int epochs_run = 0;
  double best_val_loss = 0.0;
  std::vector<double> val_history;  // index 0 is the initial snapshot
};

// Conventional framework: minimize mean squared prediction error.
TrainOutcome train_mse(const data::SampleSet& train, const data::SampleSet& val,
                       const TrainConfig& cfg);

// Distribution-head framework: the predicted parameters feed the dispatch
// kernel and the task loss differentiates through the first-order condition.
TrainOutcome train_taskspecific(const data::SampleSet& train,
                                const data::SampleSet& val,
                                const CurveProvider& curves,
                                const dist::Penalties& pen, const TrainConfig& cfg);

// Direct dispatch head trained on the regret loss; gradients vanish where
// the median clamp binds.
TrainOutcome train_modelfree(const data::SampleSet& train, const data::SampleSet& val,
                             const CurveProvider& curves, const dist::Penalties& pen,
                             const TrainConfig& cfg);

struct PeriodMetrics {
  int count = 0;
  double mse = 0.0;
  double cost_loss = 0.0;
  double cost_loss_std = 0.0;
};

struct EvalMetrics {
  int count = 0;
  double mse = 0.0;        // MW^2, framework's own prediction vs realized load
  double cost_loss = 0.0;  // $ mean regret
  double cost_loss_std = 0.0;
  std::array<PeriodMetrics, 4> periods;  // [0,6) [6,12) [12,18) [18,24)
};

// Dispatches the test set with the predictor's framework policy and scores
// prediction error and dispatch-cost regret, broken down by daily period.
// Honors EDLAB_THREADS for the per-sample loop.
EvalMetrics evaluate(const Predictor& predictor, const data::SampleSet& test,
                     const CurveProvider& curves, const dist::Penalties& pen);

}  // namespace edlab::learn
