#include "edlab/mlp.hpp"

#include <cmath>

#include "edlab/errors.hpp"

namespace edlab::learn {

Mlp::Mlp(const std::vector<int>& layer_sizes, Rng& rng) {
  if (layer_sizes.size() < 2)
    throw InvalidParams("mlp needs at least input and output sizes");
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Eigen::MatrixXd w(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) w(r, c) = rng.uniform(-bound, bound);
    w_.push_back(std::move(w));
    b_.push_back(Eigen::VectorXd::Zero(fan_out));
  }
}

Mlp::Mlp(std::vector<Eigen::MatrixXd> weights, std::vector<Eigen::VectorXd> biases)
    : w_(std::move(weights)), b_(std::move(biases)) {
  if (w_.size() != b_.size() || w_.empty())
    throw InvalidParams("mlp weight/bias layer counts differ");
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
  if (x.size() != input_size()) throw DimensionMismatch("mlp forward input size");
  Eigen::VectorXd a = x;
  for (std::size_t l = 0; l < w_.size(); ++l) {
    a = (w_[l] * a + b_[l]).eval();
    if (l + 1 < w_.size()) a = a.cwiseMax(0.0);
  }
  return a;
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& x, Trace* trace) const {
  if (x.rows() != input_size()) throw DimensionMismatch("mlp forward input size");
  if (trace) {
    trace->acts.clear();
    trace->acts.push_back(x);
  }
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < w_.size(); ++l) {
    a = ((w_[l] * a).colwise() + b_[l]).eval();
    if (l + 1 < w_.size()) a = a.cwiseMax(0.0);
    if (trace) trace->acts.push_back(a);
  }
  return a;
}

MlpGradients Mlp::backward_batch(const Trace& trace,
                                 const Eigen::MatrixXd& upstream) const {
  if (trace.acts.size() != w_.size() + 1)
    throw DimensionMismatch("mlp backward: trace does not match layer count");
  if (upstream.rows() != output_size() || upstream.cols() != trace.acts[0].cols())
    throw DimensionMismatch("mlp backward: upstream shape");

  MlpGradients grads = zero_gradients();
  Eigen::MatrixXd delta = upstream;
  for (int l = layer_count() - 1; l >= 0; --l) {
    grads.w[l].noalias() = delta * trace.acts[l].transpose();
    grads.b[l] = delta.rowwise().sum();
    if (l > 0) {
      delta = (w_[l].transpose() * delta).eval();
      // Rectifier gate: the stored activation is already max(0, pre).
      delta = delta.cwiseProduct(
          (trace.acts[l].array() > 0.0).cast<double>().matrix());
    }
  }
  return grads;
}

MlpGradients Mlp::zero_gradients() const {
  MlpGradients g;
  for (std::size_t l = 0; l < w_.size(); ++l) {
    g.w.push_back(Eigen::MatrixXd::Zero(w_[l].rows(), w_[l].cols()));
    g.b.push_back(Eigen::VectorXd::Zero(b_[l].size()));
  }
  return g;
}

Adam::Adam(const Mlp& shape, double learning_rate, double beta1, double beta2,
           double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
  m_ = shape.zero_gradients();
  v_ = shape.zero_gradients();
}

void Adam::step(Mlp& mlp, const MlpGradients& grad) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t l = 0; l < m_.w.size(); ++l) {
    m_.w[l] = beta1_ * m_.w[l] + (1.0 - beta1_) * grad.w[l];
    v_.w[l] = beta2_ * v_.w[l] + (1.0 - beta2_) * grad.w[l].cwiseProduct(grad.w[l]);
    mlp.weights()[l].array() -=
        lr_ * (m_.w[l].array() / bc1) /
        ((v_.w[l].array() / bc2).sqrt() + eps_);

    m_.b[l] = beta1_ * m_.b[l] + (1.0 - beta1_) * grad.b[l];
    v_.b[l] = beta2_ * v_.b[l] + (1.0 - beta2_) * grad.b[l].cwiseProduct(grad.b[l]);
    mlp.biases()[l].array() -=
        lr_ * (m_.b[l].array() / bc1) /
        ((v_.b[l].array() / bc2).sqrt() + eps_);
  }
}

}  // namespace edlab::learn
