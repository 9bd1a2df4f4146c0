#include "vteach/imitation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "vteach/eval.hpp"
#include "vteach/io.hpp"

namespace vteach {

namespace {

constexpr double kMaxOffset = 10.0;

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<ExpertTransition> flatten(const std::vector<ExpertEpisode>& episodes) {
  std::vector<ExpertTransition> out;
  for (const auto& e : episodes) out.insert(out.end(), e.transitions.begin(), e.transitions.end());
  return out;
}

std::vector<ExpertTransition> sample_batch(const std::vector<ExpertTransition>& pool, int n, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::vector<ExpertTransition> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(pool[pick(rng)]);
  return out;
}

Rng stream(std::uint64_t seed, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag};
  return Rng(seq);
}

// Deterministic teacher actions for one episode with the heuristic learner.
std::vector<ExpertTransition> greedy_rollout(const GaussianPolicy& teacher, const Episode& episode,
                                             const EnvParams& env, std::uint64_t seed,
                                             std::vector<Point2>* teacher_path = nullptr) {
  Rng rng = stream(seed, 0x7e5);
  const std::size_t len = episode.length();
  EnvState s = initial_state(episode, env, rng);
  std::vector<ExpertTransition> out;
  if (teacher_path) teacher_path->push_back(s.teacher);
  while (s.step + 1 < len) {
    const Observation obs = teacher_view(s, len);
    const Vec2 a = teacher_policy_act(teacher, obs);
    out.push_back({obs, a});
    s = step_env(s, heuristic_learner_action(learner_view(s, len), rng), a, env, episode, rng);
    if (teacher_path) teacher_path->push_back(s.teacher);
  }
  return out;
}

}  // namespace

std::size_t ExpertDataset::transition_count() const {
  std::size_t n = 0;
  for (const auto& e : episodes) n += e.transitions.size();
  return n;
}

ExpertDataset generate_expert_dataset(int n_episodes, std::uint64_t seed, const ExpertConfig& cfg) {
  if (n_episodes < 1) throw InvalidArgument("expert dataset needs at least one episode");
  EnvParams env = cfg.env;
  env.connected = true;
  env.validate();
  Rng rng(seed);
  std::uniform_real_distribution<double> offset(0.0, kMaxOffset);
  ExpertDataset data;
  for (int i = 0; i < n_episodes; ++i) {
    const Episode episode = make_fc_episode(offset(rng));
    const std::size_t len = episode.length();
    EnvState s = initial_state(episode, env, rng);
    std::vector<ExpertTransition> transitions;
    std::vector<Point2> teacher{s.teacher};
    std::vector<Point2> learner{s.learner};
    for (std::size_t step = 0; step < len; ++step) {
      const Observation obs = teacher_view(s, len);
      const Vec2 a = scripted_teacher_action(obs, cfg.teacher_gain, cfg.teacher_max_step);
      transitions.push_back({obs, a});
      if (step + 1 == len) break;
      s = step_env(s, heuristic_learner_action(learner_view(s, len), rng), a, env, episode, rng);
      teacher.push_back(s.teacher);
      learner.push_back(s.learner);
    }
    data.episodes.push_back({std::move(transitions), episode.target,
                             Trajectory(std::move(teacher), Role::teacher),
                             Trajectory(std::move(learner), Role::learner)});
  }
  return data;
}

void save_expert_dataset(const std::filesystem::path& dir, const ExpertDataset& data) {
  std::filesystem::create_directories(dir);
  io::Manifest manifest;
  for (std::size_t k = 0; k < data.episodes.size(); ++k) {
    const auto& e = data.episodes[k];
    const std::string base = std::to_string(k);
    const std::pair<const char*, const Trajectory*> parts[] = {
        {"target", &e.target}, {"teacher", &e.teacher}, {"learner", &e.learner}};
    for (const auto& [role, traj] : parts) {
      const std::string file = base + "_" + role + ".csv";
      io::write_trajectory(dir / file, *traj);
      manifest.emplace_back(base + "/" + role, file);
    }
  }
  io::write_manifest(dir / "manifest.csv", manifest);
}

ExpertDataset load_expert_dataset(const std::filesystem::path& dir, const EnvParams& env) {
  const auto manifest = io::read_manifest(dir / "manifest.csv");
  std::map<std::string, std::map<std::string, std::filesystem::path>> groups;
  std::vector<std::string> order;
  for (const auto& [name, path] : manifest) {
    const auto slash = name.find('/');
    if (slash == std::string::npos) throw LoadError("expert manifest entry '" + name + "' is not <episode>/<role>");
    const std::string ep = name.substr(0, slash);
    if (!groups.count(ep)) order.push_back(ep);
    groups[ep][name.substr(slash + 1)] = path;
  }
  if (order.empty()) throw LoadError("expert manifest lists no episodes");
  ExpertDataset data;
  for (const auto& ep : order) {
    auto& files = groups[ep];
    if (!files.count("target") || !files.count("teacher")) {
      throw LoadError("expert episode " + ep + " needs target and teacher files");
    }
    Trajectory target = io::read_trajectory(files["target"], Role::target);
    Trajectory teacher = io::read_trajectory(files["teacher"], Role::teacher);
    const bool has_learner = files.count("learner") > 0;
    Trajectory learner = has_learner ? io::read_trajectory(files["learner"], Role::learner)
                                     : teacher.with_role(Role::learner);
    const std::size_t len = target.size();
    if (len != kFcEpisodeLength || teacher.size() != len || learner.size() != len) {
      throw LoadError("expert episode " + ep + " must have 250 points in every file");
    }
    ExpertEpisode e{{}, target, teacher, learner};
    const bool coupled = env.connected && has_learner;
    for (std::size_t s = 0; s < len; ++s) {
      const double progress = static_cast<double>(s) / static_cast<double>(len - 1);
      const Observation obs{target[s], teacher[s], learner[s], progress};
      Vec2 action;
      if (s + 1 < len) {
        action = teacher[s + 1] - teacher[s];
        if (coupled) {
          action -= coupling_forces(learner[s], teacher[s], env.modality, env.stiffness_scale).teacher;
        }
      } else {
        action = e.transitions.back().action;
      }
      if (!is_finite(action)) throw LoadError("expert episode " + ep + " yields a non-finite action");
      e.transitions.push_back({obs, action});
    }
    data.episodes.push_back(std::move(e));
  }
  return data;
}

Discriminator::Discriminator(std::vector<int> hidden, double action_scale, double learning_rate)
    : action_scale_(action_scale) {
  if (!(action_scale > 0.0)) throw InvalidArgument("discriminator action scale must be > 0");
  std::vector<int> sizes{feature_size(FeatureKind::teacher) + 2};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  net_ = nn::Mlp(sizes);
  opt_ = nn::Adam(net_.parameter_count(), learning_rate);
}

void Discriminator::initialize(Rng& rng) { net_.initialize(rng, 1.0); }

nn::Vector Discriminator::features(const Observation& obs, Vec2 action) const {
  const nn::Vector f = encode(obs, FeatureKind::teacher);
  nn::Vector x(f.size() + 2);
  x << f, action.x / action_scale_, action.y / action_scale_;
  return x;
}

double Discriminator::logit(const Observation& obs, Vec2 action) const {
  return net_.forward(features(obs, action))[0];
}

double Discriminator::probability(const Observation& obs, Vec2 action) const {
  return sigmoid(logit(obs, action));
}

double surrogate_reward(double d) {
  const double c = std::clamp(d, kMinDiscriminatorOutput, 1.0 - kMinDiscriminatorOutput);
  return -std::log(1.0 - c);
}

DiscriminatorStats discriminator_loss(const Discriminator& d, const std::vector<ExpertTransition>& expert,
                                      const std::vector<ExpertTransition>& generator, nn::Vector* grad) {
  if (expert.empty() || generator.empty()) throw InvalidArgument("discriminator batches must be non-empty");
  if (grad) *grad = nn::Vector::Zero(static_cast<Eigen::Index>(d.net().parameter_count()));
  DiscriminatorStats st;
  nn::Vector out_grad(1);
  const auto run = [&](const std::vector<ExpertTransition>& batch, bool is_expert) {
    const double w = 0.5 / static_cast<double>(batch.size());
    double correct = 0.0;
    for (const auto& t : batch) {
      nn::Mlp::Tape tape;
      const double z = d.net().forward(d.features(t.obs, t.action), tape)[0];
      st.loss += w * (is_expert ? softplus(-z) : softplus(z));
      correct += is_expert ? (z > 0.0) : (z < 0.0);
      if (grad) {
        out_grad[0] = w * (is_expert ? sigmoid(z) - 1.0 : sigmoid(z));
        d.net().backward(tape, out_grad, *grad);
      }
    }
    return correct / static_cast<double>(batch.size());
  };
  st.expert_accuracy = run(expert, true);
  st.generator_accuracy = run(generator, false);
  return st;
}

DiscriminatorStats discriminator_update(Discriminator& d, const std::vector<ExpertTransition>& expert,
                                        const std::vector<ExpertTransition>& generator) {
  nn::Vector grad;
  const DiscriminatorStats st = discriminator_loss(d, expert, generator, &grad);
  if (!std::isfinite(st.loss) || !nn::all_finite(grad)) {
    throw NumericalError("discriminator loss is not finite: loss " + std::to_string(st.loss) +
                             ", expert accuracy " + std::to_string(st.expert_accuracy) +
                             ", generator accuracy " + std::to_string(st.generator_accuracy),
                         0);
  }
  d.optimizer().step(d.net().params(), grad);
  return st;
}

double evaluate_teacher(const GaussianPolicy& teacher, const std::vector<Episode>& episodes,
                        const EnvParams& env, std::uint64_t seed) {
  if (episodes.empty()) throw InvalidArgument("teacher evaluation needs at least one episode");
  EnvParams alone = env;
  alone.connected = false;
  double sum = 0.0;
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    std::vector<Point2> path;
    greedy_rollout(teacher, episodes[i], alone, seed + i, &path);
    sum += similarity(episodes[i].target, Trajectory(std::move(path), Role::teacher)).value;
  }
  return sum / static_cast<double>(episodes.size());
}

namespace {

double balanced_holdout_accuracy(const Discriminator& d, const std::vector<ExpertTransition>& holdout,
                                 const GaussianPolicy& policy, const EnvParams& env, std::uint64_t seed) {
  const Episode probe = make_fc_episode(3.0);
  const auto generated = greedy_rollout(policy, probe, env, seed);
  const DiscriminatorStats st = discriminator_loss(d, holdout, generated, nullptr);
  return 0.5 * (st.expert_accuracy + st.generator_accuracy);
}

}  // namespace

GailResult gail_train(const EnvParams& env_in, const ExpertDataset& expert, const GailHyper& hyper) {
  if (expert.episodes.empty() || expert.transition_count() == 0) {
    throw InvalidArgument("gail_train needs a non-empty expert dataset");
  }
  if (hyper.total_steps < 0 || hyper.snapshots < 2) {
    throw InvalidArgument("gail_train needs total_steps >= 0 and at least 2 snapshots");
  }
  EnvParams env = env_in;
  env.connected = true;
  env.validate();

  std::size_t n_holdout = static_cast<std::size_t>(
      std::ceil(hyper.holdout_fraction * static_cast<double>(expert.episodes.size())));
  n_holdout = std::min(n_holdout, expert.episodes.size() - 1);
  const std::vector<ExpertEpisode> train_eps(expert.episodes.begin(), expert.episodes.end() - n_holdout);
  std::vector<ExpertEpisode> holdout_eps(expert.episodes.end() - n_holdout, expert.episodes.end());
  if (holdout_eps.empty()) holdout_eps = train_eps;
  const auto train_pairs = flatten(train_eps);
  const auto holdout_pairs = flatten(holdout_eps);

  Rng init = stream(hyper.seed, 1);
  Rng sampling = stream(hyper.seed, 2);
  Rng episodes_rng = stream(hyper.seed, 3);
  Rng batches = stream(hyper.seed, 4);

  GaussianPolicy policy(FeatureKind::teacher, hyper.hidden, hyper.max_step);
  policy.initialize(init, hyper.init_output_gain, hyper.init_log_std);
  ValueCritic critic(FeatureKind::teacher, hyper.hidden);
  critic.initialize(init);
  ActorCritic generator(std::move(policy), std::move(critic), hyper.a2c);
  Discriminator disc(hyper.disc_hidden, hyper.max_step, hyper.disc_lr);
  disc.initialize(init);

  std::uniform_real_distribution<double> offset(0.0, kMaxOffset);
  GailResult result;
  std::vector<ExpertTransition> round_pairs;
  double reward_sum = 0.0;
  long reward_count = 0;

  const auto milestone_step = [&](int k) {
    return static_cast<int>(std::llround(static_cast<double>(hyper.total_steps) * k / (hyper.snapshots - 1)));
  };
  const auto checkpoint = [&](int k, int step) {
    result.snapshots.push_back(generator.policy());
    const double mean_reward = reward_count > 0 ? reward_sum / static_cast<double>(reward_count) : 0.0;
    result.history.push_back({k, step,
                              balanced_holdout_accuracy(disc, holdout_pairs, generator.policy(), env,
                                                        hyper.seed),
                              mean_reward});
    reward_sum = 0.0;
    reward_count = 0;
  };
  const auto disc_round = [&](const std::vector<ExpertTransition>& generated, int updates) {
    for (int i = 0; i < updates; ++i) {
      discriminator_update(disc, sample_batch(train_pairs, hyper.disc_batch, batches),
                           sample_batch(generated, hyper.disc_batch, batches));
    }
  };

  if (hyper.total_steps > 0) {
    // Teach the discriminator the untrained generator before the first checkpoint.
    const auto initial = greedy_rollout(generator.policy(), make_fc_episode(offset(episodes_rng)), env,
                                        hyper.seed + 1);
    disc_round(initial, hyper.disc_warmup_updates);
  }
  checkpoint(0, 0);
  int next_milestone = 1;
  int steps = 0;
  const auto rollout_length = static_cast<std::size_t>(hyper.a2c.rollout_length);
  const Board board = env.board;

  while (steps < hyper.total_steps) {
    const Episode episode = make_fc_episode(offset(episodes_rng));
    const std::size_t len = episode.length();
    EnvState s = initial_state(episode, env, sampling);
    Rollout rollout;
    double action_length = 0.0;
    int episode_steps = 0;
    while (steps < hyper.total_steps && s.step + 1 < len) {
      const Observation obs = teacher_view(s, len);
      const Vec2 a = generator.policy().sample(obs, sampling);
      action_length += norm(a);
      ++episode_steps;
      const Vec2 applied = clamp_action(a, hyper.max_step);
      const Vec2 learner_action = heuristic_learner_action(learner_view(s, len), sampling);
      s = step_env(s, learner_action, applied, env, episode, sampling);
      const double r = surrogate_reward(disc.probability(obs, applied));
      reward_sum += r;
      ++reward_count;
      rollout.steps.push_back({obs, a, r});
      round_pairs.push_back({obs, applied});
      ++steps;
      if (rollout.steps.size() == rollout_length || steps == hyper.total_steps || s.step + 1 >= len) {
        rollout.next_obs = teacher_view(s, len);
        rollout.terminal = false;
        try {
          generator.update(rollout);
        } catch (const NumericalError& e) {
          throw TrainingDiverged(std::string("generator update failed: ") + e.what(), next_milestone - 1);
        }
        rollout.steps.clear();
      }
      if (static_cast<int>(round_pairs.size()) >= hyper.disc_round_steps) {
        disc_round(round_pairs, hyper.disc_updates_per_round);
        round_pairs.clear();
      }
      while (next_milestone < hyper.snapshots && steps == milestone_step(next_milestone)) {
        checkpoint(next_milestone, steps);
        ++next_milestone;
      }
    }
    const double mean_length = action_length / std::max(1, episode_steps);
    if (!std::isfinite(mean_length) || mean_length > board.half_extent) {
      throw TrainingDiverged("generator actions diverged (mean length " + std::to_string(mean_length) + ")",
                             next_milestone - 1);
    }
  }
  while (next_milestone < hyper.snapshots) checkpoint(next_milestone++, steps);
  return result;
}

std::size_t argmax_earliest(const std::vector<double>& scores) {
  if (scores.empty()) throw InvalidArgument("argmax of an empty score list");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

TeacherSelection select_teacher(const std::vector<GaussianPolicy>& snapshots,
                                const std::vector<Episode>& episodes, const EnvParams& env,
                                std::uint64_t seed) {
  if (snapshots.empty()) throw InvalidArgument("select_teacher needs at least one snapshot");
  TeacherSelection sel;
  for (const auto& s : snapshots) sel.scores.push_back(evaluate_teacher(s, episodes, env, seed));
  sel.index = argmax_earliest(sel.scores);
  return sel;
}

std::string snapshot_filename(const StiffnessModality& m, int k) {
  return "teacher_" + m.name + "_v" + std::to_string(k) + ".policy";
}

}  // namespace vteach
