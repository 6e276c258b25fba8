#pragma once

#include <Eigen/Dense>
#include <vector>

#include "edlab/rng.hpp"

namespace edlab::learn {

struct MlpGradients {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;
};

// Fully connected net with rectifier hidden layers and a linear output
// layer. Weight init is uniform with fan-in scaling, drawn from the caller's
// seeded generator so runs are reproducible.
class Mlp {
 public:
  Mlp() = default;
  Mlp(const std::vector<int>& layer_sizes, Rng& rng);
  Mlp(std::vector<Eigen::MatrixXd> weights, std::vector<Eigen::VectorXd> biases);

  int input_size() const { return w_.empty() ? 0 : static_cast<int>(w_.front().cols()); }
  int output_size() const { return w_.empty() ? 0 : static_cast<int>(w_.back().rows()); }
  int layer_count() const { return static_cast<int>(w_.size()); }

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

  struct Trace {
    std::vector<Eigen::MatrixXd> acts;  // acts[0] = input, acts[l] = layer output
  };

  // Samples are columns. Fills the trace when requested.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& x, Trace* trace = nullptr) const;

  // Gradient of sum over columns of upstream(:,j) . output(:,j) with respect
  // to every weight and bias. Exact backpropagation; the rectifier
  // subgradient at 0 is taken as 0.
  MlpGradients backward_batch(const Trace& trace, const Eigen::MatrixXd& upstream) const;

  const std::vector<Eigen::MatrixXd>& weights() const { return w_; }
  const std::vector<Eigen::VectorXd>& biases() const { return b_; }
  std::vector<Eigen::MatrixXd>& weights() { return w_; }
  std::vector<Eigen::VectorXd>& biases() { return b_; }

  MlpGradients zero_gradients() const;

 private:
  std::vector<Eigen::MatrixXd> w_;
  std::vector<Eigen::VectorXd> b_;
};

// Adam with the usual bias correction; one state pair per parameter.
class Adam {
 public:
  Adam(const Mlp& shape, double learning_rate, double beta1 = 0.9,
       double beta2 = 0.999, double epsilon = 1e-8);
  void step(Mlp& mlp, const MlpGradients& grad);

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  MlpGradients m_, v_;
};

}  // namespace edlab::learn
