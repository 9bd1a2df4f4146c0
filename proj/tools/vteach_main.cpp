#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vteach/config.hpp"
#include "vteach/eval.hpp"
#include "vteach/imitation.hpp"
#include "vteach/io.hpp"
#include "vteach/letters.hpp"
#include "vteach/runner.hpp"
#include "vteach/stats.hpp"

namespace fs = std::filesystem;
using namespace vteach;

namespace {

fs::path default_out_dir() {
  if (const char* env = std::getenv(config::kOutputDirEnv); env && *env) return env;
  return "out";
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw LoadError("cannot write " + p.string());
  return f;
}

// Config file plus one `--<dotted.key>` flag per leaf key.
struct ConfigOptions {
  std::string file;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("--config", file, "JSON experiment config");
    const nlohmann::json defaults = config::to_json(default_config(Task::fc));
    for (const auto& key : config::leaf_keys(defaults))
      app->add_option("--" + key, overrides[key], "override config key " + key);
  }

  ExperimentConfig resolve() const {
    nlohmann::json j;
    if (!file.empty()) {
      std::ifstream f(file);
      if (!f) throw LoadError("cannot open config: " + file);
      j = nlohmann::json::parse(f);
    }
    // The task decides the defaults, so it goes first.
    if (auto it = overrides.find("task"); it != overrides.end() && !it->second.empty()) j["task"] = it->second;
    nlohmann::json full = config::to_json(config::from_json(j));
    for (const auto& [key, value] : overrides)
      if (!value.empty() && key != "task") config::set_path(full, key, value);
    return config::from_json(full);
  }
};

void print_reports(std::ostream& out, const std::vector<GameUnitResult>& rows, Task task) {
  const bool fc = task == Task::fc;
  const std::vector<std::pair<const char*, std::function<stats::HypothesisReport()>>> reports{
      {"H1", [&] { return stats::h1_per_unit(rows); }},
      {"H2", [&] { return stats::h2_auc(rows); }},
      {"H3", [&] { return stats::h3_time_to_threshold(rows, fc ? stats::kThetaFc : stats::kThetaWesl); }},
      {"H4",
       [&] { return stats::h4_variance(rows, fc ? stats::kConvergenceUnitFc : stats::kConvergenceUnitWesl); }},
  };
  for (const auto& [id, make] : reports) {
    try {
      stats::write_report(out, make());
    } catch (const Error& e) {
      out << id << ": not computed (" << e.what() << ")\n";
    }
  }
}

void write_meta(const fs::path& path, const RunResults& r) {
  nlohmann::json meta{{"wall_seconds", r.wall_seconds}, {"failures", r.failures}};
  open_out(path) << meta.dump(2) << '\n';
}

void write_run(const fs::path& dir, const RunResults& r) {
  fs::create_directories(dir);
  write_results(dir / "results.csv", r);
  {
    auto f = open_out(dir / "episodes.csv");
    write_episode_scores(f, r);
  }
  {
    auto f = open_out(dir / "curves.csv");
    write_learning_curves(f, learning_curves(r.rows));
  }
  {
    auto f = open_out(dir / "report.txt");
    print_reports(f, r.rows, r.config.task);
  }
  config::save(dir / "config.json", r.config);
  write_meta(dir / "meta.json", r);
}

int cmd_run(const ConfigOptions& opts, const fs::path& out) {
  ExperimentConfig cfg = opts.resolve();
  RunResults r = run_experiment(cfg);
  write_run(out, r);
  print_reports(std::cout, r.rows, cfg.task);
  for (const auto& f : r.failures) std::cerr << "failure: " << f << '\n';
  std::cerr << "results written to " << out << '\n';
  return 0;
}

int cmd_sweep(const ConfigOptions& opts, const fs::path& out, const std::vector<double>& variances,
              const std::vector<std::string>& kinds, int first_unit, int last_unit) {
  ExperimentConfig cfg = opts.resolve();
  std::vector<NoiseKind> ks;
  for (const auto& k : kinds) ks.push_back(noise_kind_from_string(k));
  auto cells = run_sweep(cfg, variances, ks);
  fs::create_directories(out);
  {
    auto f = open_out(out / "sweep.csv");
    write_sweep_summary(f, cells);
  }
  int wins = 0;
  for (const auto& cell : cells) {
    std::ostringstream name;
    name << to_string(cell.noise.kind) << "_v" << io::format_double(cell.noise_variance);
    write_run(out / name.str(), cell.results);
    ArmMeans m = arm_means(cell.results.rows, first_unit, last_unit);
    wins += m.connected > m.not_connected;
    std::cout << name.str() << " units " << first_unit << '-' << last_unit << ": not connected "
              << io::format_double(m.not_connected) << ", connected " << io::format_double(m.connected) << '\n';
  }
  std::cout << "connected ahead in " << wins << " of " << cells.size() << " cells\n";
  return 0;
}

int cmd_stats(const std::string& results, const std::string& task_name, double mad, const std::string& curves) {
  auto rows = read_results(fs::path(results));
  if (rows.empty()) throw IncompleteData("results file has no rows");
  Task task = task_name.empty() ? rows.front().task : task_from_string(task_name);
  if (mad > 0.0) rows = stats::filter_outliers_mad(rows, mad);
  print_reports(std::cout, rows, task);
  if (!curves.empty()) {
    auto f = open_out(curves);
    write_learning_curves(f, learning_curves(rows));
  }
  return 0;
}

int cmd_eval_pair(const std::string& target, const std::string& produced) {
  auto t = io::read_trajectory(fs::path(target), Role::target);
  auto p = io::read_trajectory(fs::path(produced), Role::learner);
  auto s = similarity(t, p);
  std::cout << io::format_double(s.value) << (s.degenerate ? " (degenerate)" : "") << '\n';
  return 0;
}

struct GailOptions {
  std::string expert_dir;
  int episodes = 20;
  std::uint64_t expert_seed = 5;
  std::string modality = "LH";
  double scale = kDefaultStiffnessScale;
  double c = kDefaultMitigation;
  double noise_sigma = kDefaultNoiseSigma;
  int eval_episodes = 10;
  std::uint64_t eval_seed = 3;
  GailHyper hyper;
};

EnvParams gail_env(const GailOptions& o) {
  EnvParams env;
  env.modality = modality_from_name(o.modality);
  env.stiffness_scale = o.scale;
  env.mitigation = o.c;
  env.noise = {o.noise_sigma > 0.0 ? NoiseKind::normal : NoiseKind::none, o.noise_sigma};
  env.connected = true;
  return env;
}

int cmd_gen_expert(const GailOptions& o, const fs::path& out) {
  ExpertConfig ec;
  ec.env = gail_env(o);
  auto data = generate_expert_dataset(o.episodes, o.expert_seed, ec);
  save_expert_dataset(out, data);
  std::cerr << data.episodes.size() << " expert episodes written to " << out << '\n';
  return 0;
}

int cmd_gail(const GailOptions& o, const fs::path& out) {
  EnvParams env = gail_env(o);
  ExpertDataset data;
  if (!o.expert_dir.empty()) {
    data = load_expert_dataset(o.expert_dir, env);
  } else {
    ExpertConfig ec;
    ec.env = env;
    data = generate_expert_dataset(o.episodes, o.expert_seed, ec);
  }
  GailResult r = gail_train(env, data, o.hyper);

  Rng rng(o.eval_seed);
  OffsetStrategy offset{OffsetKind::random_integer, 3.0, 10};
  auto eps = fc_episodes(offset, o.eval_episodes, rng);
  auto sel = select_teacher(r.snapshots, eps, env, o.eval_seed);

  fs::create_directories(out);
  for (std::size_t k = 0; k < r.snapshots.size(); ++k)
    save_policy(out / snapshot_filename(env.modality, static_cast<int>(k)), r.snapshots[k]);
  auto f = open_out(out / "history.csv");
  f << "milestone,step,holdout_accuracy,mean_surrogate_reward,similarity\n";
  for (std::size_t k = 0; k < r.history.size(); ++k) {
    const auto& h = r.history[k];
    f << h.milestone << ',' << h.step << ',' << io::format_double(h.holdout_accuracy) << ','
      << io::format_double(h.mean_surrogate_reward) << ',' << io::format_double(sel.scores[k]) << '\n';
    std::cout << "v" << h.milestone << " step " << h.step << " holdout accuracy "
              << io::format_double(h.holdout_accuracy) << " similarity " << io::format_double(sel.scores[k]) << '\n';
  }
  std::cout << "selected " << snapshot_filename(env.modality, static_cast<int>(sel.index)) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Virtual teacher / learner coupling experiments"};
  app.require_subcommand(1);
  fs::path out = default_out_dir();

  ConfigOptions run_opts;
  auto* run = app.add_subcommand("run", "Run a two-arm experiment");
  run_opts.attach(run);
  run->add_option("--out", out, "output directory (default $VTEACH_OUT_DIR or ./out)");

  ConfigOptions sweep_opts;
  std::vector<double> variances{4, 6, 8, 10};
  std::vector<std::string> kinds{"normal", "uniform"};
  int first_unit = 4, last_unit = 5;
  auto* sweep = app.add_subcommand("sweep", "Noise robustness grid");
  sweep_opts.attach(sweep);
  sweep->add_option("--out", out, "output directory");
  sweep->add_option("--variances", variances, "noise variances")->delimiter(',');
  sweep->add_option("--kinds", kinds, "noise kinds")->delimiter(',');
  sweep->add_option("--first-unit", first_unit, "first unit of the cell summary");
  sweep->add_option("--last-unit", last_unit, "last unit of the cell summary");

  std::string results, task_name, curves;
  double mad = 0.0;
  auto* st = app.add_subcommand("stats", "Hypothesis reports from a results file");
  st->add_option("results", results, "results file")->required();
  st->add_option("--task", task_name, "fc or wesl (default: from the file)");
  st->add_option("--mad", mad, "median-absolute-deviation outlier threshold (0: off)");
  st->add_option("--curves", curves, "also write learning curves here");

  GailOptions g;
  auto add_env_opts = [&](CLI::App* a) {
    a->add_option("--episodes", g.episodes, "expert episodes to generate");
    a->add_option("--expert-seed", g.expert_seed, "expert generation seed");
    a->add_option("--modality", g.modality, "stiffness modality");
    a->add_option("--stiffness-scale", g.scale, "stiffness scale");
    a->add_option("--c", g.c, "mitigation factor");
    a->add_option("--noise-sigma", g.noise_sigma, "learner observation noise (normal)");
    a->add_option("--out", out, "output directory");
  };
  auto* gail = app.add_subcommand("gail-train", "Train teacher snapshots by adversarial imitation");
  add_env_opts(gail);
  gail->add_option("--expert", g.expert_dir, "expert directory (default: generate)");
  gail->add_option("--steps", g.hyper.total_steps, "generator steps");
  gail->add_option("--snapshots", g.hyper.snapshots, "snapshot count");
  gail->add_option("--seed", g.hyper.seed, "training seed");
  gail->add_option("--actor-lr", g.hyper.a2c.actor_lr, "generator actor learning rate");
  gail->add_option("--critic-lr", g.hyper.a2c.critic_lr, "generator critic learning rate");
  gail->add_option("--disc-lr", g.hyper.disc_lr, "discriminator learning rate");
  gail->add_option("--disc-warmup", g.hyper.disc_warmup_updates, "discriminator warm-up updates");
  gail->add_option("--eval-episodes", g.eval_episodes, "FC episodes for snapshot selection");
  gail->add_option("--eval-seed", g.eval_seed, "snapshot selection seed");

  auto* gen_expert = app.add_subcommand("gen-expert", "Write a scripted-teacher expert dataset");
  add_env_opts(gen_expert);

  std::string target, produced;
  auto* pair = app.add_subcommand("eval-pair", "Similarity of two trajectory files");
  pair->add_option("target", target, "target trajectory")->required();
  pair->add_option("produced", produced, "produced trajectory")->required();

  auto* gen_letters = app.add_subcommand("gen-letters", "Write the bundled 26-letter dataset");
  gen_letters->add_option("--out", out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opts, out);
    if (sweep->parsed()) return cmd_sweep(sweep_opts, out, variances, kinds, first_unit, last_unit);
    if (st->parsed()) return cmd_stats(results, task_name, mad, curves);
    if (gail->parsed()) return cmd_gail(g, out);
    if (gen_expert->parsed()) return cmd_gen_expert(g, out);
    if (pair->parsed()) return cmd_eval_pair(target, produced);
    if (gen_letters->parsed()) {
      letters::write_dataset(out);
      std::cerr << "letters written to " << out << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
