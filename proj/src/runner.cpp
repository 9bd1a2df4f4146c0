#include "vteach/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <istream>
#include <thread>

#include "vteach/eval.hpp"
#include "vteach/io.hpp"
#include "vteach/letters.hpp"

namespace vteach {

namespace {

enum Stream : std::uint32_t { kInit = 1, kSampling = 2, kTraining = 3, kEvalEpisodes = 4, kEvalNoise = 5 };

Rng derived_rng(std::uint64_t seed, Stream stream, std::uint32_t a = 0, std::uint32_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), a, b};
  return Rng(seq);
}

}  // namespace

TeacherFn make_teacher(const TeacherConfig& cfg) {
  if (cfg.kind == TeacherKind::scripted) {
    if (!(cfg.gain > 0.0) || !(cfg.max_step > 0.0)) {
      throw InvalidArgument("scripted teacher needs positive gain and max_step");
    }
    return [gain = cfg.gain, max_step = cfg.max_step](const Observation& o) {
      return scripted_teacher_action(o, gain, max_step);
    };
  }
  auto snapshot = std::make_shared<const GaussianPolicy>(load_policy(cfg.snapshot));
  if (snapshot->features() != FeatureKind::teacher) {
    throw LoadError(cfg.snapshot.string() + ": snapshot does not use the teacher encoding");
  }
  return [snapshot](const Observation& o) { return teacher_policy_act(*snapshot, o); };
}

void ExperimentConfig::validate() const {
  env.validate();
  learner.reward.validate();
  if (game_units < 1) throw InvalidArgument("game_units must be >= 1");
  if (steps_per_unit < 0) throw InvalidArgument("steps_per_unit must be >= 0");
  if (repetitions < 1) throw InvalidArgument("repetitions must be >= 1");
  if (eval_episodes < 1) throw InvalidArgument("eval_episodes must be >= 1");
  if (task == Task::wesl && eval_episodes != static_cast<int>(letters::kLetterCount)) {
    throw InvalidArgument("WESL evaluation covers exactly 26 letter episodes");
  }
  if (offset.kind == OffsetKind::random_integer && offset.upper < 1) {
    throw InvalidArgument("random offset upper bound must be >= 1");
  }
  if (learner.max_step <= 0.0) throw InvalidArgument("learner max_step must be positive");
  if (learner.a2c.rollout_length < 1) throw InvalidArgument("rollout_length must be >= 1");
  if (outlier_mad < 0.0) throw InvalidArgument("outlier_mad must be >= 0");
  if (threads < 0) throw InvalidArgument("threads must be >= 0");
}

ExperimentConfig default_config(Task task) {
  ExperimentConfig cfg;
  cfg.task = task;
  cfg.offset = OffsetStrategy{OffsetKind::random_integer, 3.0, 10};
  cfg.env.noise = NoiseSpec{NoiseKind::normal, kDefaultNoiseSigma};
  if (task == Task::wesl) {
    cfg.game_units = 6;
    cfg.eval_episodes = static_cast<int>(letters::kLetterCount);
  }
  return cfg;
}

Learner make_learner(const LearnerConfig& cfg, std::uint64_t seed) {
  Rng init = derived_rng(seed, kInit);
  GaussianPolicy policy(FeatureKind::learner, cfg.hidden, cfg.max_step);
  policy.initialize(init, cfg.init_output_gain, cfg.init_log_std);
  ValueCritic critic(FeatureKind::learner, cfg.hidden);
  critic.initialize(init);
  return Learner{ActorCritic(std::move(policy), std::move(critic), cfg.a2c), derived_rng(seed, kSampling)};
}

UnitOutcome run_game_unit(Learner& learner, const TeacherFn& teacher, const EnvParams& env,
                          const OffsetStrategy& offset, int steps, Rng& episode_rng,
                          const RewardParams& reward) {
  UnitOutcome out;
  const GaussianPolicy& policy = learner.agent.policy();
  const auto rollout_length = static_cast<std::size_t>(learner.agent.hyper().rollout_length);
  int taken = 0;
  while (taken < steps) {
    const Episode episode = make_fc_episode(offset.draw(episode_rng));
    const std::size_t len = episode.length();
    EnvState s = initial_state(episode, env, episode_rng);
    Rollout rollout;
    while (taken < steps && s.step + 1 < len) {
      const Observation obs = learner_view(s, len);
      const Vec2 action = policy.sample(obs, learner.rng);
      const Vec2 teacher_action = teacher ? teacher(teacher_view(s, len)) : Vec2{};
      s = step_env(s, clamp_action(action, policy.max_step()), teacher_action, env, episode, episode_rng);
      const double r = learner_reward(s, reward);
      rollout.steps.push_back({obs, action, r});
      out.rewards.push_back(r);
      ++taken;
      const bool episode_end = s.step + 1 >= len;
      if (rollout.steps.size() == rollout_length || taken == steps || episode_end) {
        // Episode ends are time limits, so the final state is bootstrapped too.
        rollout.next_obs = learner_view(s, len);
        rollout.terminal = false;
        try {
          learner.agent.update(rollout);
        } catch (const NumericalError& e) {
          out.failed = true;
          out.message = e.what();
          break;
        }
        rollout.steps.clear();
      }
    }
    if (out.failed) break;
  }
  if (!out.rewards.empty()) {
    double sum = 0.0;
    for (double r : out.rewards) sum += r;
    out.mean_reward = sum / static_cast<double>(out.rewards.size());
  }
  return out;
}

EvaluationSummary evaluate_policy(const PolicyFn& policy, const std::vector<Episode>& episodes,
                                  const EnvParams& env, std::uint64_t noise_seed) {
  if (episodes.empty()) throw InvalidArgument("evaluation needs at least one episode");
  EnvParams alone = env;
  alone.connected = false;
  EvaluationSummary sum;
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    const Episode& episode = episodes[i];
    const std::size_t len = episode.length();
    Rng rng = derived_rng(noise_seed, kEvalNoise, static_cast<std::uint32_t>(i));
    EnvState s = initial_state(episode, alone, rng);
    std::vector<Point2> path{s.learner};
    path.reserve(len);
    while (s.step + 1 < len) {
      s = step_env(s, policy(learner_view(s, len)), Vec2{}, alone, episode, rng);
      path.push_back(s.learner);
    }
    sum.scores.push_back(similarity(episode.target, Trajectory(std::move(path), Role::learner)).value);
  }
  sum.mean = stats::mean(sum.scores);
  sum.median = stats::median(sum.scores);
  return sum;
}

EvaluationSummary evaluate_learner(const GaussianPolicy& policy, const std::vector<Episode>& episodes,
                                   const EnvParams& env, std::uint64_t noise_seed) {
  return evaluate_policy(
      [&policy](const Observation& o) { return clamp_action(policy.mean_action(o), policy.max_step()); },
      episodes, env, noise_seed);
}

std::vector<Episode> fc_episodes(const OffsetStrategy& offset, int n, Rng& rng) {
  std::vector<Episode> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(make_fc_episode(offset.draw(rng)));
  return out;
}

std::vector<Episode> evaluation_episodes(const ExperimentConfig& cfg, Rng& rng) {
  if (cfg.task == Task::fc) return fc_episodes(cfg.offset, cfg.eval_episodes, rng);
  if (cfg.letters_manifest.empty()) return letters::bundled_episodes();
  return letters::load_dataset(cfg.letters_manifest);
}

namespace {

struct RepetitionOutput {
  std::vector<GameUnitResult> rows;
  std::vector<EpisodeScore> episodes;
  std::vector<std::string> failures;
};

RepetitionOutput run_repetition(const ExperimentConfig& cfg, const TeacherFn& teacher, int rep) {
  RepetitionOutput out;
  const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(rep);
  const auto urep = static_cast<std::uint32_t>(rep);
  for (bool connected : {false, true}) {
    // Both arms start from the same learner and see the same episodes and noise.
    Learner learner = make_learner(cfg.learner, seed);
    Rng training = derived_rng(cfg.seed, kTraining, urep);
    EnvParams env = cfg.env;
    env.connected = connected;
    for (int unit = 1; unit <= cfg.game_units; ++unit) {
      const UnitOutcome o =
          run_game_unit(learner, teacher, env, cfg.offset, cfg.steps_per_unit, training, cfg.learner.reward);
      if (o.failed) {
        out.failures.push_back("repetition " + std::to_string(rep) + " unit " + std::to_string(unit) +
                               (connected ? " connected: " : " not-connected: ") + o.message);
      }
      const auto uunit = static_cast<std::uint32_t>(unit);
      Rng episode_rng = derived_rng(cfg.seed, kEvalEpisodes, urep, uunit);
      const std::vector<Episode> episodes = evaluation_episodes(cfg, episode_rng);
      const std::uint64_t noise_seed = derived_rng(cfg.seed, kEvalNoise, urep, uunit)();
      const EvaluationSummary e = evaluate_learner(learner.agent.policy(), episodes, env, noise_seed);
      out.rows.push_back({rep, unit, connected, cfg.task, e.mean});
      for (std::size_t i = 0; i < e.scores.size(); ++i) {
        out.episodes.push_back({rep, unit, connected, static_cast<int>(i), e.scores[i]});
      }
    }
  }
  return out;
}

}  // namespace

RunResults run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const TeacherFn teacher = make_teacher(cfg.teacher);
  std::vector<RepetitionOutput> outputs(static_cast<std::size_t>(cfg.repetitions));

  unsigned workers = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::thread::hardware_concurrency();
  workers = std::clamp(workers, 1u, static_cast<unsigned>(cfg.repetitions));
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  const auto work = [&] {
    for (int rep = next++; rep < cfg.repetitions; rep = next++) {
      try {
        outputs[static_cast<std::size_t>(rep)] = run_repetition(cfg, teacher, rep);
      } catch (...) {
        const std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  RunResults r;
  r.config = cfg;
  for (auto& o : outputs) {
    r.rows.insert(r.rows.end(), o.rows.begin(), o.rows.end());
    r.episodes.insert(r.episodes.end(), o.episodes.begin(), o.episodes.end());
    r.failures.insert(r.failures.end(), o.failures.begin(), o.failures.end());
  }
  if (cfg.outlier_mad > 0.0) r.rows = stats::filter_outliers_mad(r.rows, cfg.outlier_mad);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

void write_results(std::ostream& out, const RunResults& r) {
  out << "repetition,unit,connected,task,similarity\n";
  for (const auto& row : r.rows) {
    out << row.repetition << ',' << row.unit << ',' << (row.connected ? 1 : 0) << ',' << to_string(row.task)
        << ',' << io::format_double(row.similarity) << '\n';
  }
}

void write_results(const std::filesystem::path& path, const RunResults& r) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  write_results(f, r);
}

void write_episode_scores(std::ostream& out, const RunResults& r) {
  out << "repetition,unit,connected,episode,similarity\n";
  for (const auto& e : r.episodes) {
    out << e.repetition << ',' << e.unit << ',' << (e.connected ? 1 : 0) << ',' << e.episode << ','
        << io::format_double(e.similarity) << '\n';
  }
}

std::vector<GameUnitResult> read_results(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "repetition,unit,connected,task,similarity") {
    throw LoadError("results file must start with 'repetition,unit,connected,task,similarity'");
  }
  std::vector<GameUnitResult> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = io::split(line, ',');
    if (f.size() != 5) throw LoadError("results line " + std::to_string(lineno) + ": expected 5 fields");
    try {
      GameUnitResult row;
      row.repetition = std::stoi(f[0]);
      row.unit = std::stoi(f[1]);
      if (f[2] != "0" && f[2] != "1") throw InvalidArgument("connected must be 0 or 1");
      row.connected = f[2] == "1";
      row.task = task_from_string(f[3]);
      row.similarity = std::stod(f[4]);
      if (row.unit < 1 || !(row.similarity >= 0.0 && row.similarity <= 1.0)) {
        throw InvalidArgument("unit must be >= 1 and similarity in [0, 1]");
      }
      rows.push_back(row);
    } catch (const std::exception& e) {
      throw LoadError("results line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  std::map<std::tuple<int, int, bool>, int> seen;
  for (const auto& row : rows) {
    if (seen[{row.repetition, row.unit, row.connected}]++ > 0) {
      throw LoadError("duplicate result for repetition " + std::to_string(row.repetition) + " unit " +
                      std::to_string(row.unit));
    }
  }
  return rows;
}

std::vector<GameUnitResult> read_results(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw LoadError("cannot open " + path.string());
  return read_results(f);
}

std::vector<CurveRow> learning_curves(const std::vector<GameUnitResult>& rows) {
  if (rows.empty()) throw InvalidArgument("learning curves need at least one result");
  std::map<std::pair<bool, int>, std::vector<double>> groups;
  for (const auto& r : rows) groups[{r.connected, r.unit}].push_back(r.similarity);
  std::vector<CurveRow> out;
  for (const auto& [key, values] : groups) out.push_back({key.second, key.first, stats::quartiles(values)});
  return out;
}

void write_learning_curves(std::ostream& out, const std::vector<CurveRow>& curves) {
  out << "connected,unit,min,q1,median,q3,max\n";
  for (const auto& c : curves) {
    out << (c.connected ? 1 : 0) << ',' << c.unit << ',' << io::format_double(c.q.min) << ','
        << io::format_double(c.q.q1) << ',' << io::format_double(c.q.median) << ','
        << io::format_double(c.q.q3) << ',' << io::format_double(c.q.max) << '\n';
  }
}

std::vector<SweepCell> run_sweep(const ExperimentConfig& base, const std::vector<double>& variances,
                                 const std::vector<NoiseKind>& kinds) {
  std::vector<SweepCell> cells;
  for (NoiseKind kind : kinds) {
    if (kind == NoiseKind::none) throw InvalidArgument("sweep noise kinds must be normal or uniform");
    for (double v : variances) {
      if (!(v > 0.0)) throw InvalidArgument("sweep variances must be positive");
      ExperimentConfig cfg = base;
      cfg.env.noise = NoiseSpec{kind, std::sqrt(v)};
      cells.push_back({cfg.env.noise, v, run_experiment(cfg)});
    }
  }
  return cells;
}

ArmMeans arm_means(const std::vector<GameUnitResult>& rows, int first_unit, int last_unit) {
  double sum[2] = {0.0, 0.0};
  int count[2] = {0, 0};
  for (const auto& r : rows) {
    if (r.unit < first_unit || r.unit > last_unit) continue;
    sum[r.connected] += r.similarity;
    ++count[r.connected];
  }
  if (count[0] == 0 || count[1] == 0) throw IncompleteData("an arm has no rows in the unit range");
  return {sum[0] / count[0], sum[1] / count[1]};
}

void write_sweep_summary(std::ostream& out, const std::vector<SweepCell>& cells) {
  out << "kind,variance,unit,mean_not_connected,mean_connected\n";
  for (const auto& cell : cells) {
    for (int u = 1; u <= cell.results.config.game_units; ++u) {
      ArmMeans m;
      try {
        m = arm_means(cell.results.rows, u, u);
      } catch (const IncompleteData&) {
        continue;
      }
      out << to_string(cell.noise.kind) << ',' << io::format_double(cell.noise_variance) << ',' << u << ','
          << io::format_double(m.not_connected) << ',' << io::format_double(m.connected) << '\n';
    }
  }
}

}  // namespace vteach
