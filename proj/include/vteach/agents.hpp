#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "vteach/env.hpp"
#include "vteach/nn.hpp"

namespace vteach {

// What an agent sees at one step. `target` is the obscured target for the
// learner and the true target for the teacher.
struct Observation {
  Point2 target;
  Point2 self;
  Point2 partner;
  double progress = 0.0;  // step / (episode length - 1)
};

Observation learner_view(const EnvState& s, std::size_t episode_length);
Observation teacher_view(const EnvState& s, std::size_t episode_length);

// Input encoding of an observation for a network. The learner encoding leaves
// out the partner position so that the learned skill does not depend on a
// teacher being present.
enum class FeatureKind { learner, teacher };

int feature_size(FeatureKind k);
nn::Vector encode(const Observation& obs, FeatureKind k);

// Diagonal Gaussian policy: mean = max_step * tanh(net(features)), with a
// state-independent log standard deviation per action axis.
class GaussianPolicy {
 public:
  GaussianPolicy() = default;
  GaussianPolicy(FeatureKind features, std::vector<int> hidden, double max_step);

  void initialize(Rng& rng, double output_gain, double log_std);

  Vec2 mean_action(const Observation& obs) const;
  Vec2 sample(const Observation& obs, Rng& rng) const;
  double log_prob(const Observation& obs, Vec2 action) const;
  double entropy() const;

  FeatureKind features() const { return features_; }
  double max_step() const { return max_step_; }
  nn::Mlp& net() { return net_; }
  const nn::Mlp& net() const { return net_; }
  Eigen::Vector2d& log_std() { return log_std_; }
  const Eigen::Vector2d& log_std() const { return log_std_; }

  // Network parameters followed by the two log standard deviations.
  nn::Vector parameters() const;
  void set_parameters(const nn::Vector& p);
  std::size_t parameter_count() const { return net_.parameter_count() + 2; }

  // Adds weight * d log pi(action | obs) / dθ to grad (layout of parameters()).
  void accumulate_log_prob_grad(const Observation& obs, Vec2 action, double weight,
                                nn::Vector& grad) const;

 private:
  FeatureKind features_ = FeatureKind::learner;
  double max_step_ = 2.0;
  nn::Mlp net_;
  Eigen::Vector2d log_std_ = Eigen::Vector2d::Zero();
};

// Scalar state-value function over the same encoding as the policy.
class ValueCritic {
 public:
  ValueCritic() = default;
  ValueCritic(FeatureKind features, std::vector<int> hidden);

  void initialize(Rng& rng);
  double value(const Observation& obs) const;
  // Adds weight * dV(obs)/dθ to grad.
  void accumulate_value_grad(const Observation& obs, double weight, nn::Vector& grad) const;

  FeatureKind features() const { return features_; }
  nn::Mlp& net() { return net_; }
  const nn::Mlp& net() const { return net_; }

 private:
  FeatureKind features_ = FeatureKind::learner;
  nn::Mlp net_;
};

// Clamps each action component to [-max_step, max_step].
Vec2 clamp_action(Vec2 a, double max_step);

// Learner heuristic used while training teachers: unit vector towards the
// observed target, times a force drawn uniformly from {1, 2}.
Vec2 heuristic_learner_action(const Observation& obs, Rng& rng);

struct RewardParams {
  double delta = 50.0;
  double booster = 15.0;
  double proximity_threshold = 1.0;
  double r_max = 100.0;

  void validate() const;
};

// r = 1/d (+ booster when within the proximity threshold of the observed
// target), with d = |obscured target - learner| + delta * |F_learner|.
double learner_reward(const EnvState& s, const RewardParams& p);

// Proportional controller on the true target: gain * (target - self),
// limited to `max_step` in length.
Vec2 scripted_teacher_action(const Observation& obs, double gain, double max_step = 2.0);

struct Transition {
  Observation obs;
  Vec2 action;
  double reward = 0.0;
};

struct Rollout {
  std::vector<Transition> steps;
  Observation next_obs;  // observation after the last transition, for bootstrapping
  bool terminal = false;
};

struct A2CHyper {
  double gamma = 0.99;
  double entropy_coef = 1e-3;
  double max_grad_norm = 5.0;
  double actor_lr = 3e-3;
  double critic_lr = 3e-3;
  double reward_scale = 0.03;  // applied to rewards before forming returns
  int rollout_length = 10;
};

struct A2CGradients {
  nn::Vector actor;  // d(actor loss)/dθ_actor
  nn::Vector critic;  // d(critic loss)/dθ_critic
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  std::vector<double> returns;
  std::vector<double> advantages;
};

// Bootstrapped n-step returns (scaled rewards), advantages against the
// critic, and the gradients of
//   actor loss  = -mean(A_t log pi(a_t|s_t)) - entropy_coef * H
//   critic loss = mean(0.5 (R_t - V(s_t))^2)
// with returns and advantages held constant.
A2CGradients a2c_gradients(const GaussianPolicy& policy, const ValueCritic& critic,
                           const Rollout& rollout, const A2CHyper& hyper);

// Policy + critic + their optimizers.
class ActorCritic {
 public:
  ActorCritic() = default;
  ActorCritic(GaussianPolicy policy, ValueCritic critic, A2CHyper hyper);

  // One synchronous update from `rollout`. Throws NumericalError (update not
  // applied) if a gradient is not finite.
  A2CGradients update(const Rollout& rollout);

  GaussianPolicy& policy() { return policy_; }
  const GaussianPolicy& policy() const { return policy_; }
  ValueCritic& critic() { return critic_; }
  const ValueCritic& critic() const { return critic_; }
  const A2CHyper& hyper() const { return hyper_; }

 private:
  GaussianPolicy policy_;
  ValueCritic critic_;
  A2CHyper hyper_;
  nn::Adam actor_opt_;
  nn::Adam critic_opt_;
};

// Deterministic action of a teacher snapshot.
Vec2 teacher_policy_act(const GaussianPolicy& snapshot, const Observation& obs);

// Policy snapshot files: a text header (format version, head type, feature
// encoding, layer sizes, max step, parameter count) and one parameter per
// line. load_policy validates the header against the parameter count and the
// encoding's input width.
void save_policy(std::ostream& out, const GaussianPolicy& p);
void save_policy(const std::filesystem::path& path, const GaussianPolicy& p);
GaussianPolicy load_policy(std::istream& in);
GaussianPolicy load_policy(const std::filesystem::path& path);

}  // namespace vteach
