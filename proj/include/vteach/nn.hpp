#pragma once

#include <Eigen/Core>
#include <vector>

#include "vteach/env.hpp"

namespace vteach::nn {

using Vector = Eigen::VectorXd;

// Fully connected network: tanh on hidden layers, linear output layer. All
// weights and biases live in one flat parameter vector so optimizers and
// gradient checks can treat the network as a point in R^n.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<int> sizes);

  // Uniform fan-in initialisation; the output layer is additionally scaled
  // by `output_gain` (0 gives an all-zero head).
  void initialize(Rng& rng, double output_gain = 1.0);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  std::size_t parameter_count() const { return static_cast<std::size_t>(params_.size()); }

  Vector& params() { return params_; }
  const Vector& params() const { return params_; }

  // Activations of every layer, kept for backward().
  struct Tape {
    std::vector<Vector> activations;
  };

  Vector forward(const Vector& x) const;
  Vector forward(const Vector& x, Tape& tape) const;

  // Adds d<out_grad, f(x)>/dθ to `grad`. Returns d<out_grad, f(x)>/dx.
  Vector backward(const Tape& tape, const Vector& out_grad, Eigen::Ref<Vector> grad) const;

 private:
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }

  std::vector<int> sizes_;
  std::vector<std::size_t> offsets_;
  Vector params_;
};

class Adam {
 public:
  Adam() = default;
  Adam(std::size_t n, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);

  // Gradient descent step: params -= lr * m_hat / (sqrt(v_hat) + eps).
  void step(Vector& params, const Vector& grad);

  double learning_rate() const { return lr_; }

 private:
  double lr_ = 1e-3;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long t_ = 0;
  Vector m_;
  Vector v_;
};

// Rescales `grad` in place to norm at most `max_norm`. Returns the norm
// before clipping.
double clip_grad_norm(Vector& grad, double max_norm);

bool all_finite(const Vector& v);

}  // namespace vteach::nn
