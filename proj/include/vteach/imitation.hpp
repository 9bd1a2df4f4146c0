#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vteach/agents.hpp"
#include "vteach/env.hpp"

namespace vteach {

// One expert decision: the teacher's view of the state and the action taken.
struct ExpertTransition {
  Observation obs;
  Vec2 action;
};

struct ExpertEpisode {
  std::vector<ExpertTransition> transitions;  // one per FC step, 250 in total
  Trajectory target;
  Trajectory teacher;
  Trajectory learner;
};

struct ExpertDataset {
  std::vector<ExpertEpisode> episodes;
  std::size_t transition_count() const;
};

struct ExpertConfig {
  EnvParams env;  // connected, observation noise applies to the heuristic learner
  double teacher_gain = 0.8;
  double teacher_max_step = 2.0;
};

// Scripted-teacher sessions in the connected environment with the heuristic
// learner attached. Each episode uses its own random phase offset in [0, 10).
ExpertDataset generate_expert_dataset(int n_episodes, std::uint64_t seed, const ExpertConfig& cfg = {});

// Expert directory: `<k>_target.csv`, `<k>_teacher.csv`, `<k>_learner.csv` per
// episode plus `manifest.csv` naming them `<k>/target` and so on.
void save_expert_dataset(const std::filesystem::path& dir, const ExpertDataset& data);

// Rebuilds transitions from recorded positions. Actions are recovered as the
// teacher displacement minus the coupling force on the teacher; the final
// state repeats the previous action because its effect is not recorded.
ExpertDataset load_expert_dataset(const std::filesystem::path& dir, const EnvParams& env);

// Sigmoid classifier over (teacher features, action / max_step).
class Discriminator {
 public:
  Discriminator() = default;
  Discriminator(std::vector<int> hidden, double action_scale, double learning_rate);

  void initialize(Rng& rng);

  // Probability that the pair came from the expert.
  double probability(const Observation& obs, Vec2 action) const;
  double logit(const Observation& obs, Vec2 action) const;

  nn::Vector features(const Observation& obs, Vec2 action) const;

  nn::Mlp& net() { return net_; }
  const nn::Mlp& net() const { return net_; }
  nn::Adam& optimizer() { return opt_; }

 private:
  nn::Mlp net_;
  nn::Adam opt_;
  double action_scale_ = 2.0;
};

inline constexpr double kMinDiscriminatorOutput = 1e-6;

// -log(1 - D) with D clamped to [1e-6, 1 - 1e-6].
double surrogate_reward(double d);

struct DiscriminatorStats {
  double expert_accuracy = 0.0;  // share of expert pairs with D > 0.5
  double generator_accuracy = 0.0;  // share of generator pairs with D < 0.5
  double loss = 0.0;  // mean binary cross-entropy over both batches
};

// Binary cross-entropy (expert = 1, generator = 0) and its gradient, with each
// batch weighted equally. Accuracies are measured before any update.
DiscriminatorStats discriminator_loss(const Discriminator& d, const std::vector<ExpertTransition>& expert,
                                      const std::vector<ExpertTransition>& generator, nn::Vector* grad);

// One optimizer step on discriminator_loss. Throws NumericalError on a
// non-finite loss or gradient.
DiscriminatorStats discriminator_update(Discriminator& d, const std::vector<ExpertTransition>& expert,
                                        const std::vector<ExpertTransition>& generator);

struct GailHyper {
  int total_steps = 12000;  // generator environment steps
  int snapshots = 10;
  std::vector<int> hidden{32};
  double max_step = 2.0;
  double init_log_std = -0.5;
  double init_output_gain = 0.1;
  A2CHyper a2c{0.99, 1e-3, 5.0, 1e-3, 1e-3, 1.0, 10};
  std::vector<int> disc_hidden{32};
  double disc_lr = 3e-3;
  int disc_batch = 128;
  int disc_updates_per_round = 5;
  int disc_round_steps = 250;  // generator steps between discriminator rounds
  int disc_warmup_updates = 1000;
  double holdout_fraction = 0.2;
  std::uint64_t seed = 11;
};

struct GailCheckpoint {
  int milestone = 0;  // 0 .. snapshots - 1
  int step = 0;
  double holdout_accuracy = 0.0;  // balanced over held-out expert and generator pairs
  double mean_surrogate_reward = 0.0;
};

struct GailResult {
  std::vector<GaussianPolicy> snapshots;
  std::vector<GailCheckpoint> history;
};

// Adversarial imitation: generator rollouts of the teacher policy in the
// connected environment with the heuristic learner, discriminator rounds, and
// actor-critic updates on the surrogate reward. Snapshots are taken at
// total_steps * k / (snapshots - 1). Throws TrainingDiverged when an episode's
// mean sampled action length exceeds the board half-extent or goes non-finite.
GailResult gail_train(const EnvParams& env, const ExpertDataset& expert, const GailHyper& hyper);

// Scores a teacher policy alone (not connected, heuristic learner still
// moving) by the similarity of its trajectory to the target.
double evaluate_teacher(const GaussianPolicy& teacher, const std::vector<Episode>& episodes,
                        const EnvParams& env, std::uint64_t seed);

struct TeacherSelection {
  std::size_t index = 0;
  std::vector<double> scores;
};

// Index of the highest score; ties go to the earliest.
std::size_t argmax_earliest(const std::vector<double>& scores);

TeacherSelection select_teacher(const std::vector<GaussianPolicy>& snapshots,
                                const std::vector<Episode>& episodes, const EnvParams& env,
                                std::uint64_t seed);

// `teacher_<modality>_v<k>.policy`
std::string snapshot_filename(const StiffnessModality& m, int k);

}  // namespace vteach
