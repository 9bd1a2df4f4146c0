#include "vteach/config.hpp"

#include <fstream>
#include <sstream>

#include "vteach/error.hpp"

namespace vteach::config {

using nlohmann::json;

namespace {

std::string offset_kind_name(OffsetKind k) { return k == OffsetKind::constant ? "constant" : "random_integer"; }

OffsetKind offset_kind_from(const std::string& s) {
  if (s == "constant") return OffsetKind::constant;
  if (s == "random_integer") return OffsetKind::random_integer;
  throw InvalidArgument("unknown offset kind: " + s);
}

std::string teacher_kind_name(TeacherKind k) { return k == TeacherKind::scripted ? "scripted" : "snapshot"; }

TeacherKind teacher_kind_from(const std::string& s) {
  if (s == "scripted") return TeacherKind::scripted;
  if (s == "snapshot") return TeacherKind::snapshot;
  throw InvalidArgument("unknown teacher kind: " + s);
}

// Overlays `patch` onto `base`, rejecting keys that `base` does not have.
void merge_known(json& base, const json& patch, const std::string& prefix) {
  if (!patch.is_object()) throw InvalidArgument("config section '" + prefix + "' must be an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) throw InvalidArgument("unknown config key: " + key);
    json& slot = base[it.key()];
    if (slot.is_object())
      merge_known(slot, it.value(), key);
    else
      slot = it.value();
  }
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  const auto& l = c.learner;
  return json{
      {"task", std::string(to_string(c.task))},
      {"modality", c.env.modality.name},
      {"connected", c.env.connected},
      {"noise", {{"kind", std::string(to_string(c.env.noise.kind))}, {"value", c.env.noise.value}}},
      {"offset", {{"kind", offset_kind_name(c.offset.kind)}, {"value", c.offset.value}, {"upper", c.offset.upper}}},
      {"c", c.env.mitigation},
      {"stiffness_scale", c.env.stiffness_scale},
      {"seed", c.seed},
      {"game_units", c.game_units},
      {"steps_per_unit", c.steps_per_unit},
      {"repetitions", c.repetitions},
      {"eval_episodes", c.eval_episodes},
      {"threads", c.threads},
      {"outlier_mad", c.outlier_mad},
      {"letters_manifest", c.letters_manifest.string()},
      {"teacher",
       {{"kind", teacher_kind_name(c.teacher.kind)},
        {"gain", c.teacher.gain},
        {"max_step", c.teacher.max_step},
        {"snapshot", c.teacher.snapshot.string()}}},
      {"learner",
       {{"hidden", l.hidden},
        {"max_step", l.max_step},
        {"init_log_std", l.init_log_std},
        {"init_output_gain", l.init_output_gain},
        {"a2c",
         {{"gamma", l.a2c.gamma},
          {"entropy_coef", l.a2c.entropy_coef},
          {"max_grad_norm", l.a2c.max_grad_norm},
          {"actor_lr", l.a2c.actor_lr},
          {"critic_lr", l.a2c.critic_lr},
          {"reward_scale", l.a2c.reward_scale},
          {"rollout_length", l.a2c.rollout_length}}},
        {"reward",
         {{"delta", l.reward.delta},
          {"booster", l.reward.booster},
          {"proximity_threshold", l.reward.proximity_threshold},
          {"r_max", l.reward.r_max}}}}},
  };
}

ExperimentConfig from_json(const json& in) {
  if (in.is_null()) return from_json(json::object());
  Task task = Task::fc;
  if (in.contains("task")) task = task_from_string(in.at("task").get<std::string>());
  json j = to_json(default_config(task));
  merge_known(j, in, "");

  ExperimentConfig c = default_config(task);
  try {
    c.env.modality = modality_from_name(j.at("modality").get<std::string>());
    c.env.connected = j.at("connected").get<bool>();
    c.env.noise.kind = noise_kind_from_string(j.at("noise").at("kind").get<std::string>());
    c.env.noise.value = j.at("noise").at("value").get<double>();
    c.offset.kind = offset_kind_from(j.at("offset").at("kind").get<std::string>());
    c.offset.value = j.at("offset").at("value").get<double>();
    c.offset.upper = j.at("offset").at("upper").get<int>();
    c.env.mitigation = j.at("c").get<double>();
    c.env.stiffness_scale = j.at("stiffness_scale").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.game_units = j.at("game_units").get<int>();
    c.steps_per_unit = j.at("steps_per_unit").get<int>();
    c.repetitions = j.at("repetitions").get<int>();
    c.eval_episodes = j.at("eval_episodes").get<int>();
    c.threads = j.at("threads").get<int>();
    c.outlier_mad = j.at("outlier_mad").get<double>();
    c.letters_manifest = j.at("letters_manifest").get<std::string>();

    const json& t = j.at("teacher");
    c.teacher.kind = teacher_kind_from(t.at("kind").get<std::string>());
    c.teacher.gain = t.at("gain").get<double>();
    c.teacher.max_step = t.at("max_step").get<double>();
    c.teacher.snapshot = t.at("snapshot").get<std::string>();

    const json& l = j.at("learner");
    c.learner.hidden = l.at("hidden").get<std::vector<int>>();
    c.learner.max_step = l.at("max_step").get<double>();
    c.learner.init_log_std = l.at("init_log_std").get<double>();
    c.learner.init_output_gain = l.at("init_output_gain").get<double>();
    const json& a = l.at("a2c");
    c.learner.a2c.gamma = a.at("gamma").get<double>();
    c.learner.a2c.entropy_coef = a.at("entropy_coef").get<double>();
    c.learner.a2c.max_grad_norm = a.at("max_grad_norm").get<double>();
    c.learner.a2c.actor_lr = a.at("actor_lr").get<double>();
    c.learner.a2c.critic_lr = a.at("critic_lr").get<double>();
    c.learner.a2c.reward_scale = a.at("reward_scale").get<double>();
    c.learner.a2c.rollout_length = a.at("rollout_length").get<int>();
    const json& r = l.at("reward");
    c.learner.reward.delta = r.at("delta").get<double>();
    c.learner.reward.booster = r.at("booster").get<double>();
    c.learner.reward.proximity_threshold = r.at("proximity_threshold").get<double>();
    c.learner.reward.r_max = r.at("r_max").get<double>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw LoadError("cannot open config: " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw LoadError("cannot parse config " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

void save(const std::filesystem::path& path, const ExperimentConfig& cfg) {
  std::ofstream f(path);
  if (!f) throw LoadError("cannot write config: " + path.string());
  f << to_json(cfg).dump(2) << '\n';
}

std::vector<std::string> leaf_keys(const json& j) {
  std::vector<std::string> out;
  auto walk = [&](auto&& self, const json& node, const std::string& prefix) -> void {
    for (auto it = node.begin(); it != node.end(); ++it) {
      const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
      if (it.value().is_object())
        self(self, it.value(), key);
      else
        out.push_back(key);
    }
  };
  walk(walk, j, "");
  return out;
}

void set_path(json& j, const std::string& dotted, const std::string& text) {
  json* node = &j;
  std::stringstream ss(dotted);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (!node->is_object() || !node->contains(part)) throw InvalidArgument("unknown config key: " + dotted);
    node = &(*node)[part];
  }
  if (node->is_object()) throw InvalidArgument("config key is a section: " + dotted);
  if (node->is_string()) {
    *node = text;
    return;
  }
  try {
    json v = json::parse(text);
    if (node->is_boolean() != v.is_boolean() || node->is_number() != v.is_number() ||
        node->is_array() != v.is_array())
      throw InvalidArgument("type mismatch for " + dotted + ": " + text);
    *node = v;
  } catch (const json::exception&) {
    throw InvalidArgument("cannot parse value for " + dotted + ": " + text);
  }
}

}  // namespace vteach::config
