#include "vteach/nn.hpp"

#include <cmath>

namespace vteach::nn {

Mlp::Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw InvalidArgument("an MLP needs at least input and output sizes");
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] <= 0 || sizes_[l + 1] <= 0) throw InvalidArgument("layer sizes must be positive");
    offsets_.push_back(n);
    n += static_cast<std::size_t>(sizes_[l + 1]) * static_cast<std::size_t>(sizes_[l] + 1);
  }
  params_ = Vector::Zero(static_cast<Eigen::Index>(n));
}

void Mlp::initialize(Rng& rng, double output_gain) {
  const std::size_t layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out)) *
                         (l + 1 == layers ? output_gain : 1.0);
    std::uniform_real_distribution<double> u(-bound, bound);
    double* w = params_.data() + weight_offset(l);
    for (int i = 0; i < in * out; ++i) w[i] = bound > 0.0 ? u(rng) : 0.0;
    double* b = w + in * out;
    for (int i = 0; i < out; ++i) b[i] = 0.0;
  }
}

Vector Mlp::forward(const Vector& x) const {
  Tape tape;
  return forward(x, tape);
}

Vector Mlp::forward(const Vector& x, Tape& tape) const {
  if (x.size() != input_size()) throw InvalidArgument("MLP input has the wrong size");
  const std::size_t layers = sizes_.size() - 1;
  tape.activations.resize(layers + 1);
  tape.activations[0] = x;
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const double* w = params_.data() + weight_offset(l);
    Eigen::Map<const Eigen::MatrixXd> W(w, out, in);
    Eigen::Map<const Vector> b(w + in * out, out);
    Vector z = W * tape.activations[l] + b;
    if (l + 1 < layers) z = z.array().tanh();
    tape.activations[l + 1] = std::move(z);
  }
  return tape.activations.back();
}

Vector Mlp::backward(const Tape& tape, const Vector& out_grad, Eigen::Ref<Vector> grad) const {
  const std::size_t layers = sizes_.size() - 1;
  Vector delta = out_grad;
  for (std::size_t l = layers; l-- > 0;) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    if (l + 1 < layers) {
      delta = delta.array() * (1.0 - tape.activations[l + 1].array().square());
    }
    const double* w = params_.data() + weight_offset(l);
    Eigen::Map<const Eigen::MatrixXd> W(w, out, in);
    double* gw = grad.data() + weight_offset(l);
    Eigen::Map<Eigen::MatrixXd> GW(gw, out, in);
    Eigen::Map<Vector> gb(gw + in * out, out);
    GW.noalias() += delta * tape.activations[l].transpose();
    gb += delta;
    delta = W.transpose() * delta;
  }
  return delta;
}

Adam::Adam(std::size_t n, double learning_rate, double beta1, double beta2, double eps)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps),
      m_(Vector::Zero(static_cast<Eigen::Index>(n))),
      v_(Vector::Zero(static_cast<Eigen::Index>(n))) {}

void Adam::step(Vector& params, const Vector& grad) {
  if (m_.size() != params.size()) {
    m_ = Vector::Zero(params.size());
    v_ = Vector::Zero(params.size());
  }
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.array().square().matrix();
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

double clip_grad_norm(Vector& grad, double max_norm) {
  const double n = grad.norm();
  if (max_norm > 0.0 && n > max_norm) grad *= max_norm / n;
  return n;
}

bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace vteach::nn
