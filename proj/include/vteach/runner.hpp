#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "vteach/agents.hpp"
#include "vteach/env.hpp"
#include "vteach/stats.hpp"

namespace vteach {

// Booster radius widened from 1 to 3 units for the experiment learner.
inline RewardParams learner_reward_defaults() {
  RewardParams r;
  r.proximity_threshold = 3.0;
  return r;
}

struct LearnerConfig {
  std::vector<int> hidden{32};
  double max_step = 2.0;
  double init_log_std = 0.0;
  double init_output_gain = 0.01;  // near-zero initial mean; the policy starts as pure exploration
  A2CHyper a2c{0.9, 1e-3, 5.0, 3e-3, 3e-2, 0.01, 20};
  RewardParams reward = learner_reward_defaults();
};

enum class TeacherKind { scripted, snapshot };

struct TeacherConfig {
  TeacherKind kind = TeacherKind::scripted;
  double gain = 0.8;
  double max_step = 2.0;
  std::filesystem::path snapshot;  // used when kind == snapshot
};

using TeacherFn = std::function<Vec2(const Observation&)>;

// Scripted controller or a loaded snapshot's mean action.
TeacherFn make_teacher(const TeacherConfig& cfg);

// Observation noise of hypothesis runs (normal, standard deviation in board units).
inline constexpr double kDefaultNoiseSigma = 0.25;

struct ExperimentConfig {
  Task task = Task::fc;  // evaluation task; training always runs on FC
  EnvParams env;  // `connected` is ignored: both arms are always run
  OffsetStrategy offset;
  int game_units = 7;
  int steps_per_unit = 1500;
  int repetitions = 10;
  int eval_episodes = 50;
  std::uint64_t seed = 7;
  TeacherConfig teacher;
  LearnerConfig learner;
  std::filesystem::path letters_manifest;  // empty: bundled letters
  int threads = 0;  // 0: hardware concurrency
  double outlier_mad = 0.0;  // 0 disables the median-absolute-deviation filter

  void validate() const;
};

// Applies the per-task defaults (7 units / 50 episodes for FC, 6 / 26 for WESL).
ExperimentConfig default_config(Task task);

// A trainable A2C learner with its own sampling RNG and training environment.
struct Learner {
  ActorCritic agent;
  Rng rng;
};

Learner make_learner(const LearnerConfig& cfg, std::uint64_t seed);

struct UnitOutcome {
  bool failed = false;
  std::string message;
  double mean_reward = 0.0;
  std::vector<double> rewards;  // per environment step
};

// Trains `learner` for exactly `steps` environment steps on fresh FC episodes,
// with the teacher coupled through the spring when `env.connected`. A
// non-finite update marks the unit failed and stops it early.
UnitOutcome run_game_unit(Learner& learner, const TeacherFn& teacher, const EnvParams& env,
                          const OffsetStrategy& offset, int steps, Rng& episode_rng,
                          const RewardParams& reward = {});

struct EvaluationSummary {
  double mean = 0.0;
  double median = 0.0;
  std::vector<double> scores;
};

using PolicyFn = std::function<Vec2(const Observation&)>;

// Runs each episode once with not-connected dynamics and deterministic
// actions, and scores the learner trajectory against the target.
EvaluationSummary evaluate_policy(const PolicyFn& policy, const std::vector<Episode>& episodes,
                                  const EnvParams& env, std::uint64_t noise_seed);

EvaluationSummary evaluate_learner(const GaussianPolicy& policy, const std::vector<Episode>& episodes,
                                   const EnvParams& env, std::uint64_t noise_seed);

// `n` FC episodes with offsets drawn from `offset`.
std::vector<Episode> fc_episodes(const OffsetStrategy& offset, int n, Rng& rng);

std::vector<Episode> evaluation_episodes(const ExperimentConfig& cfg, Rng& rng);

struct EpisodeScore {
  int repetition = 0;
  int unit = 0;
  bool connected = false;
  int episode = 0;
  double similarity = 0.0;
};

struct RunResults {
  ExperimentConfig config;
  std::vector<GameUnitResult> rows;
  std::vector<EpisodeScore> episodes;
  std::vector<std::string> failures;
  double wall_seconds = 0.0;
};

RunResults run_experiment(const ExperimentConfig& cfg);

// Results file: `repetition,unit,connected,task,similarity`.
void write_results(std::ostream& out, const RunResults& r);
void write_results(const std::filesystem::path& path, const RunResults& r);
// Per-episode detail: `repetition,unit,connected,episode,similarity`.
void write_episode_scores(std::ostream& out, const RunResults& r);
std::vector<GameUnitResult> read_results(std::istream& in);
std::vector<GameUnitResult> read_results(const std::filesystem::path& path);

struct CurveRow {
  int unit = 0;
  bool connected = false;
  Quartiles q;
};

// Per-arm, per-unit five-number summaries of the similarity.
std::vector<CurveRow> learning_curves(const std::vector<GameUnitResult>& rows);
void write_learning_curves(std::ostream& out, const std::vector<CurveRow>& curves);

// Robustness grid: one experiment per (noise kind, value) cell.
struct SweepCell {
  NoiseSpec noise;
  double noise_variance = 0.0;
  RunResults results;
};

std::vector<SweepCell> run_sweep(const ExperimentConfig& base, const std::vector<double>& variances,
                                 const std::vector<NoiseKind>& kinds);

struct ArmMeans {
  double not_connected = 0.0;
  double connected = 0.0;
};

// Mean similarity per arm over units first..last (inclusive). Throws
// IncompleteData when an arm has no rows in the range.
ArmMeans arm_means(const std::vector<GameUnitResult>& rows, int first_unit, int last_unit);

// `kind,variance,unit,mean_not_connected,mean_connected` per cell and unit.
void write_sweep_summary(std::ostream& out, const std::vector<SweepCell>& cells);

}  // namespace vteach
