#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "vteach/config.hpp"
#include "vteach/io.hpp"
#include "vteach/letters.hpp"
#include "vteach/runner.hpp"
#include "vteach/stats.hpp"

using namespace vteach;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c = default_config(Task::fc);
  c.repetitions = 3;
  c.game_units = 2;
  c.steps_per_unit = 200;
  c.eval_episodes = 4;
  c.threads = 2;
  return c;
}

std::string results_text(const RunResults& r) {
  std::ostringstream ss;
  write_results(ss, r);
  write_episode_scores(ss, r);
  return ss.str();
}

}  // namespace

TEST_CASE("bundled letters") {
  const auto& ls = letters::bundled();
  REQUIRE(ls.size() == 26);
  double total = 0;
  for (std::size_t i = 0; i < ls.size(); ++i) {
    CHECK(ls[i].first == static_cast<char>('A' + i));
    CHECK(ls[i].second.size() >= 2);
    total += static_cast<double>(ls[i].second.size());
  }
  CHECK(total / 26 > 60);
  CHECK(total / 26 < 85);

  fs::path dir = fs::temp_directory_path() / "vteach_test_letters";
  fs::remove_all(dir);
  letters::write_dataset(dir);
  auto eps = letters::load_dataset(dir / "manifest.csv");
  REQUIRE(eps.size() == 26);
  for (std::size_t i = 0; i < 26; ++i) {
    CHECK(eps[i].task == Task::wesl);
    REQUIRE(eps[i].length() == ls[i].second.size());
    for (std::size_t k = 0; k < eps[i].length(); ++k) CHECK(eps[i].target[k] == ls[i].second[k]);
  }
  io::write_manifest(dir / "short.csv", {{"A", "A.csv"}});
  CHECK_THROWS_AS(letters::load_dataset(dir / "short.csv"), LoadError);
}

TEST_CASE("default configs") {
  auto fc = default_config(Task::fc);
  CHECK(fc.game_units == 7);
  CHECK(fc.eval_episodes == 50);
  CHECK(fc.steps_per_unit == 1500);
  CHECK(fc.repetitions == 10);
  CHECK(fc.env.modality.name == "LH");
  CHECK(fc.teacher.kind == TeacherKind::scripted);
  auto wesl = default_config(Task::wesl);
  CHECK(wesl.game_units == 6);
  CHECK(wesl.eval_episodes == 26);
  wesl.eval_episodes = 10;
  CHECK_THROWS_AS(wesl.validate(), InvalidArgument);
  fc.repetitions = 0;
  CHECK_THROWS_AS(fc.validate(), InvalidArgument);
  fc.repetitions = 1;
  fc.steps_per_unit = -1;
  CHECK_THROWS_AS(fc.validate(), InvalidArgument);
}

TEST_CASE("run_game_unit with zero steps leaves the learner unchanged") {
  LearnerConfig lc;
  Learner l = make_learner(lc, 5);
  const auto before = l.agent.policy().parameters();
  Rng ep(1);
  auto out = run_game_unit(l, make_teacher({}), EnvParams{}, OffsetStrategy{}, 0, ep);
  CHECK_FALSE(out.failed);
  CHECK(out.rewards.empty());
  CHECK(l.agent.policy().parameters() == before);
}

TEST_CASE("run_game_unit is deterministic") {
  auto run = [] {
    LearnerConfig lc;
    Learner l = make_learner(lc, 5);
    Rng ep(2);
    EnvParams env;
    env.noise = {NoiseKind::normal, 0.5};
    run_game_unit(l, make_teacher({}), env, OffsetStrategy{OffsetKind::random_integer, 3, 10}, 700, ep);
    return l.agent.policy().parameters();
  };
  CHECK(run() == run());
}

TEST_CASE("a failing update marks the unit failed") {
  LearnerConfig lc;
  lc.a2c.reward_scale = std::numeric_limits<double>::infinity();
  Learner l = make_learner(lc, 5);
  Rng ep(3);
  auto out = run_game_unit(l, make_teacher({}), EnvParams{}, OffsetStrategy{}, 100, ep);
  CHECK(out.failed);
  CHECK_FALSE(out.message.empty());
}

TEST_CASE("identical learners per arm") {
  LearnerConfig lc;
  CHECK(make_learner(lc, 11).agent.policy().parameters() == make_learner(lc, 11).agent.policy().parameters());
  CHECK(make_learner(lc, 11).agent.policy().parameters() != make_learner(lc, 12).agent.policy().parameters());
}

namespace {

std::vector<Episode> baseline_episodes() {
  Rng rng(1);
  return fc_episodes(OffsetStrategy{OffsetKind::random_integer, 3, 10}, 20, rng);
}

}  // namespace

TEST_CASE("tracking oracles score high") {
  EnvParams env;
  env.connected = false;
  auto eps = baseline_episodes();
  auto plain = evaluate_policy([](const Observation& o) { return clamp_action(o.target - o.self, 2.0); }, eps, env, 1);
  CHECK(plain.scores.size() == 20);
  CHECK(plain.mean >= 0.9);
  // Compensates for the mitigation factor, so it reaches the target whenever
  // the step limit allows.
  const double c = env.mitigation;
  auto compensated = evaluate_policy(
      [c](const Observation& o) { return clip_norm((o.target - o.self) * (1.0 / c), 2.0); }, eps, env, 1);
  CHECK(compensated.mean >= 0.93);
}

// The learner moves at most c * max_step = 1 unit per step, slower than the
// target at its fastest, and the trailing lag costs similarity at the pinned
// endpoints.
TEST_CASE("perfect-tracking oracle reaches 0.95" * doctest::may_fail()) {
  EnvParams env;
  env.connected = false;
  auto r = evaluate_policy([](const Observation& o) { return clamp_action(o.target - o.self, 2.0); },
                           baseline_episodes(), env, 1);
  CHECK(r.mean >= 0.95);
}

TEST_CASE("untrained learner baseline") {
  auto eps = baseline_episodes();
  EnvParams env;
  env.connected = false;
  env.noise = {NoiseKind::normal, kDefaultNoiseSigma};
  LearnerConfig lc;
  Learner fresh = make_learner(lc, 1);
  auto base = evaluate_learner(fresh.agent.policy(), eps, env, 1);
  CHECK(base.mean < 0.6);
  const auto params = fresh.agent.policy().parameters();
  CHECK(evaluate_learner(fresh.agent.policy(), eps, env, 1).scores == base.scores);
  CHECK(fresh.agent.policy().parameters() == params);
}

TEST_CASE("evaluation uses not-connected dynamics") {
  Rng rng(2);
  auto eps = fc_episodes(OffsetStrategy{}, 3, rng);
  EnvParams a, b;
  a.connected = true;
  b.connected = false;
  auto pol = [](const Observation& o) { return clip_norm(o.target - o.self, 1.5); };
  CHECK(evaluate_policy(pol, eps, a, 4).scores == evaluate_policy(pol, eps, b, 4).scores);
}

TEST_CASE("WESL evaluation covers 26 letters") {
  ExperimentConfig c = default_config(Task::wesl);
  Rng rng(1);
  auto eps = evaluation_episodes(c, rng);
  CHECK(eps.size() == 26);
  for (const auto& e : eps) CHECK(e.task == Task::wesl);
}

TEST_CASE("minimal experiment") {
  ExperimentConfig c = small_config();
  c.repetitions = 1;
  c.game_units = 1;
  auto r = run_experiment(c);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].connected != r.rows[1].connected);
  CHECK(r.episodes.size() == 2 * 4);
}

TEST_CASE("experiments are reproducible and complete") {
  ExperimentConfig c = small_config();
  auto a = run_experiment(c);
  c.threads = 1;
  auto b = run_experiment(c);
  CHECK(a.rows.size() == 2u * c.repetitions * c.game_units);
  CHECK(results_text(a) == results_text(b));
  for (const auto& row : a.rows) {
    CHECK(row.similarity >= 0.0);
    CHECK(row.similarity <= 1.0);
  }
}

TEST_CASE("results file round-trip") {
  auto r = run_experiment(small_config());
  std::stringstream ss;
  write_results(ss, r);
  CHECK(ss.str().rfind("repetition,unit,connected,task,similarity\n", 0) == 0);
  auto rows = read_results(ss);
  REQUIRE(rows.size() == r.rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].repetition == r.rows[i].repetition);
    CHECK(rows[i].unit == r.rows[i].unit);
    CHECK(rows[i].connected == r.rows[i].connected);
    CHECK(rows[i].similarity == r.rows[i].similarity);
  }
  std::stringstream dup("repetition,unit,connected,task,similarity\n0,1,1,FC,0.5\n0,1,1,FC,0.6\n");
  CHECK_THROWS_AS(read_results(dup), LoadError);
  std::stringstream bad("repetition,unit,connected,task,similarity\n0,1,2,FC,0.5\n");
  CHECK_THROWS_AS(read_results(bad), LoadError);
}

TEST_CASE("learning curves") {
  std::vector<GameUnitResult> one{{0, 1, true, Task::fc, 0.42}};
  auto c1 = learning_curves(one);
  REQUIRE(c1.size() == 1);
  CHECK((c1[0].q.min == 0.42 && c1[0].q.q1 == 0.42 && c1[0].q.median == 0.42 && c1[0].q.q3 == 0.42 &&
         c1[0].q.max == 0.42));

  std::vector<GameUnitResult> five;
  for (int r = 0; r < 5; ++r) five.push_back({r, 1, false, Task::fc, 1.0 + r});
  auto c5 = learning_curves(five);
  CHECK(c5[0].q.min == 1);
  CHECK(c5[0].q.q1 == 2);
  CHECK(c5[0].q.median == 3);
  CHECK(c5[0].q.q3 == 4);
  CHECK(c5[0].q.max == 5);

  auto r = run_experiment(small_config());
  for (const auto& row : learning_curves(r.rows)) {
    std::vector<double> v;
    for (const auto& x : r.rows)
      if (x.unit == row.unit && x.connected == row.connected) v.push_back(x.similarity);
    CHECK(row.q.median == stats::median(v));
  }
  std::ostringstream out;
  write_learning_curves(out, learning_curves(r.rows));
  CHECK(out.str().rfind("connected,unit,min,q1,median,q3,max\n", 0) == 0);
}

TEST_CASE("arm means and sweep summary") {
  std::vector<GameUnitResult> rows{{0, 4, false, Task::fc, 0.2}, {0, 4, true, Task::fc, 0.6},
                                   {0, 5, false, Task::fc, 0.4}, {0, 5, true, Task::fc, 0.8}};
  auto m = arm_means(rows, 4, 5);
  CHECK(m.not_connected == doctest::Approx(0.3));
  CHECK(m.connected == doctest::Approx(0.7));
  CHECK_THROWS_AS(arm_means(rows, 1, 3), IncompleteData);

  ExperimentConfig c = small_config();
  c.repetitions = 2;
  c.game_units = 1;
  auto cells = run_sweep(c, {4.0}, {NoiseKind::normal, NoiseKind::uniform_circle});
  REQUIRE(cells.size() == 2);
  CHECK(cells[0].results.config.env.noise.value == doctest::Approx(2.0));
  CHECK(cells[1].results.config.env.noise.kind == NoiseKind::uniform_circle);
  CHECK_THROWS_AS(run_sweep(c, {4.0}, {NoiseKind::none}), InvalidArgument);
}

TEST_CASE("config round-trip and overrides") {
  ExperimentConfig c = default_config(Task::fc);
  c.seed = 99;
  c.env.noise = {NoiseKind::uniform_circle, 3.0};
  c.learner.hidden = {16, 16};
  auto back = config::from_json(config::to_json(c));
  CHECK(config::to_json(back) == config::to_json(c));

  auto j = config::to_json(default_config(Task::fc));
  config::set_path(j, "noise.kind", "normal");
  config::set_path(j, "noise.value", "2.5");
  config::set_path(j, "c", "0.7");
  config::set_path(j, "learner.a2c.actor_lr", "0.01");
  config::set_path(j, "connected", "false");
  auto o = config::from_json(j);
  CHECK(o.env.noise.value == 2.5);
  CHECK(o.env.mitigation == 0.7);
  CHECK(o.learner.a2c.actor_lr == 0.01);
  CHECK_FALSE(o.env.connected);
  CHECK_THROWS_AS(config::set_path(j, "nope", "1"), InvalidArgument);
  CHECK_THROWS_AS(config::set_path(j, "seed", "abc"), InvalidArgument);
  CHECK_THROWS_AS(config::set_path(j, "connected", "3"), InvalidArgument);
  CHECK_THROWS_AS(config::from_json(nlohmann::json{{"bogus", 1}}), InvalidArgument);

  auto w = config::from_json(nlohmann::json{{"task", "WESL"}});
  CHECK(w.eval_episodes == 26);
  CHECK(w.game_units == 6);

  auto keys = config::leaf_keys(config::to_json(c));
  for (const char* k : {"task", "modality", "connected", "noise.kind", "noise.value", "offset.kind", "offset.value",
                        "c", "stiffness_scale", "seed"})
    CHECK(std::find(keys.begin(), keys.end(), k) != keys.end());
}
