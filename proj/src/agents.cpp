#include "vteach/agents.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "vteach/io.hpp"

namespace vteach {

namespace {

constexpr double kRelativeScale = 5.0;  // board units per unit of relative-position feature
constexpr double kLog2Pi = 1.8378770664093453;

std::vector<int> layer_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

}  // namespace

Observation learner_view(const EnvState& s, std::size_t episode_length) {
  const double denom = episode_length > 1 ? static_cast<double>(episode_length - 1) : 1.0;
  return {s.obscured_target, s.learner, s.teacher, static_cast<double>(s.step) / denom};
}

Observation teacher_view(const EnvState& s, std::size_t episode_length) {
  const double denom = episode_length > 1 ? static_cast<double>(episode_length - 1) : 1.0;
  return {s.target, s.teacher, s.learner, static_cast<double>(s.step) / denom};
}

int feature_size(FeatureKind k) { return k == FeatureKind::learner ? 4 : 7; }

nn::Vector encode(const Observation& obs, FeatureKind k) {
  const Board board;
  const Vec2 rel = (obs.target - obs.self) * (1.0 / kRelativeScale);
  const Point2 own = obs.self * (1.0 / board.limit());
  nn::Vector f(feature_size(k));
  if (k == FeatureKind::learner) {
    f << rel.x, rel.y, own.x, own.y;
  } else {
    const Vec2 partner = (obs.partner - obs.self) * (1.0 / kRelativeScale);
    f << rel.x, rel.y, partner.x, partner.y, own.x, own.y, obs.progress;
  }
  return f;
}

// ---------------------------------------------------------------------------
// GaussianPolicy

GaussianPolicy::GaussianPolicy(FeatureKind features, std::vector<int> hidden, double max_step)
    : features_(features),
      max_step_(max_step),
      net_(layer_sizes(feature_size(features), hidden, 2)) {
  if (!(max_step > 0.0)) throw InvalidArgument("max_step must be > 0");
}

void GaussianPolicy::initialize(Rng& rng, double output_gain, double log_std) {
  net_.initialize(rng, output_gain);
  log_std_.setConstant(log_std);
}

Vec2 GaussianPolicy::mean_action(const Observation& obs) const {
  const nn::Vector z = net_.forward(encode(obs, features_));
  return {max_step_ * std::tanh(z[0]), max_step_ * std::tanh(z[1])};
}

Vec2 GaussianPolicy::sample(const Observation& obs, Rng& rng) const {
  const Vec2 mu = mean_action(obs);
  std::normal_distribution<double> n(0.0, 1.0);
  const double e0 = n(rng);
  const double e1 = n(rng);
  return {mu.x + std::exp(log_std_[0]) * e0, mu.y + std::exp(log_std_[1]) * e1};
}

double GaussianPolicy::log_prob(const Observation& obs, Vec2 action) const {
  const Vec2 mu = mean_action(obs);
  const double d[2] = {action.x - mu.x, action.y - mu.y};
  double lp = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double sigma = std::exp(log_std_[i]);
    lp += -0.5 * (d[i] / sigma) * (d[i] / sigma) - log_std_[i] - 0.5 * kLog2Pi;
  }
  return lp;
}

double GaussianPolicy::entropy() const {
  return log_std_.sum() + 2.0 * 0.5 * (kLog2Pi + 1.0);
}

nn::Vector GaussianPolicy::parameters() const {
  nn::Vector p(static_cast<Eigen::Index>(parameter_count()));
  p.head(net_.params().size()) = net_.params();
  p.tail(2) = log_std_;
  return p;
}

void GaussianPolicy::set_parameters(const nn::Vector& p) {
  if (static_cast<std::size_t>(p.size()) != parameter_count()) {
    throw InvalidArgument("policy parameter vector has the wrong size");
  }
  net_.params() = p.head(net_.params().size());
  log_std_ = p.tail(2);
}

void GaussianPolicy::accumulate_log_prob_grad(const Observation& obs, Vec2 action, double weight,
                                              nn::Vector& grad) const {
  nn::Mlp::Tape tape;
  const nn::Vector z = net_.forward(encode(obs, features_), tape);
  const double a[2] = {action.x, action.y};
  Eigen::Vector2d out_grad;
  for (int i = 0; i < 2; ++i) {
    const double t = std::tanh(z[i]);
    const double mu = max_step_ * t;
    const double var = std::exp(2.0 * log_std_[i]);
    const double diff = a[i] - mu;
    out_grad[i] = weight * (diff / var) * max_step_ * (1.0 - t * t);
    grad[grad.size() - 2 + i] += weight * (diff * diff / var - 1.0);
  }
  net_.backward(tape, out_grad, grad.head(net_.params().size()));
}

// ---------------------------------------------------------------------------
// ValueCritic

ValueCritic::ValueCritic(FeatureKind features, std::vector<int> hidden)
    : features_(features), net_(layer_sizes(feature_size(features), hidden, 1)) {}

void ValueCritic::initialize(Rng& rng) { net_.initialize(rng, 1.0); }

double ValueCritic::value(const Observation& obs) const {
  return net_.forward(encode(obs, features_))[0];
}

void ValueCritic::accumulate_value_grad(const Observation& obs, double weight,
                                        nn::Vector& grad) const {
  nn::Mlp::Tape tape;
  net_.forward(encode(obs, features_), tape);
  nn::Vector out_grad(1);
  out_grad[0] = weight;
  net_.backward(tape, out_grad, grad);
}

// ---------------------------------------------------------------------------
// Scripted behaviour and reward

Vec2 clamp_action(Vec2 a, double max_step) {
  return {std::clamp(a.x, -max_step, max_step), std::clamp(a.y, -max_step, max_step)};
}

Vec2 heuristic_learner_action(const Observation& obs, Rng& rng) {
  std::uniform_int_distribution<int> force(1, 2);
  const double f = static_cast<double>(force(rng));
  const Vec2 d = obs.target - obs.self;
  const double n = norm(d);
  if (n == 0.0) return {0.0, 0.0};
  return d * (f / n);
}

void RewardParams::validate() const {
  if (!(delta > 0.0)) throw InvalidArgument("reward delta must be > 0");
  if (!(booster >= 0.0)) throw InvalidArgument("reward booster must be >= 0");
  if (!(proximity_threshold > 0.0)) throw InvalidArgument("proximity threshold must be > 0");
  if (!(r_max > 0.0)) throw InvalidArgument("r_max must be > 0");
}

double learner_reward(const EnvState& s, const RewardParams& p) {
  const double gap = distance(s.obscured_target, s.learner);
  const double d = gap + p.delta * norm(s.forces.learner);
  const double base = d > 0.0 ? std::min(1.0 / d, p.r_max) : p.r_max;
  return base + (gap <= p.proximity_threshold ? p.booster : 0.0);
}

Vec2 scripted_teacher_action(const Observation& obs, double gain, double max_step) {
  return clip_norm((obs.target - obs.self) * gain, max_step);
}

// ---------------------------------------------------------------------------
// Advantage actor-critic

A2CGradients a2c_gradients(const GaussianPolicy& policy, const ValueCritic& critic,
                           const Rollout& rollout, const A2CHyper& hyper) {
  const std::size_t n = rollout.steps.size();
  if (n == 0) throw InvalidArgument("a2c update needs a non-empty rollout");
  A2CGradients g;
  g.actor = nn::Vector::Zero(static_cast<Eigen::Index>(policy.parameter_count()));
  g.critic = nn::Vector::Zero(static_cast<Eigen::Index>(critic.net().parameter_count()));
  g.returns.resize(n);
  g.advantages.resize(n);

  double ret = rollout.terminal ? 0.0 : critic.value(rollout.next_obs);
  for (std::size_t t = n; t-- > 0;) {
    ret = hyper.reward_scale * rollout.steps[t].reward + hyper.gamma * ret;
    g.returns[t] = ret;
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t t = 0; t < n; ++t) {
    const Transition& tr = rollout.steps[t];
    const double v = critic.value(tr.obs);
    const double adv = g.returns[t] - v;
    g.advantages[t] = adv;
    g.actor_loss -= inv_n * adv * policy.log_prob(tr.obs, tr.action);
    g.critic_loss += inv_n * 0.5 * adv * adv;
    policy.accumulate_log_prob_grad(tr.obs, tr.action, -inv_n * adv, g.actor);
    critic.accumulate_value_grad(tr.obs, -inv_n * adv, g.critic);
    if (!nn::all_finite(g.actor) || !nn::all_finite(g.critic)) {
      throw NumericalError("non-finite gradient in actor-critic update", static_cast<long>(t));
    }
  }
  g.actor_loss -= hyper.entropy_coef * policy.entropy();
  g.actor.tail(2).array() -= hyper.entropy_coef;
  return g;
}

ActorCritic::ActorCritic(GaussianPolicy policy, ValueCritic critic, A2CHyper hyper)
    : policy_(std::move(policy)),
      critic_(std::move(critic)),
      hyper_(hyper),
      actor_opt_(policy_.parameter_count(), hyper.actor_lr),
      critic_opt_(critic_.net().parameter_count(), hyper.critic_lr) {}

A2CGradients ActorCritic::update(const Rollout& rollout) {
  A2CGradients g = a2c_gradients(policy_, critic_, rollout, hyper_);
  nn::Vector ga = g.actor;
  nn::Vector gc = g.critic;
  nn::clip_grad_norm(ga, hyper_.max_grad_norm);
  nn::clip_grad_norm(gc, hyper_.max_grad_norm);
  nn::Vector p = policy_.parameters();
  actor_opt_.step(p, ga);
  policy_.set_parameters(p);
  critic_opt_.step(critic_.net().params(), gc);
  return g;
}

Vec2 teacher_policy_act(const GaussianPolicy& snapshot, const Observation& obs) {
  return snapshot.mean_action(obs);
}

// ---------------------------------------------------------------------------
// Snapshot files

namespace {

constexpr const char* kPolicyMagic = "vteach-policy";
constexpr int kPolicyVersion = 1;

std::string_view feature_name(FeatureKind k) { return k == FeatureKind::learner ? "learner" : "teacher"; }

std::string expect_key(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) throw LoadError("policy file truncated before '" + key + "'");
  std::istringstream ss(line);
  std::string k;
  ss >> k;
  if (k != key) throw LoadError("policy file: expected '" + key + "', got '" + k + "'");
  std::string rest;
  std::getline(ss, rest);
  return rest;
}

}  // namespace

void save_policy(std::ostream& out, const GaussianPolicy& p) {
  out << kPolicyMagic << ' ' << kPolicyVersion << '\n';
  out << "head gaussian\n";
  out << "features " << feature_name(p.features()) << '\n';
  out << "layers";
  for (int s : p.net().sizes()) out << ' ' << s;
  out << '\n';
  out << "max_step " << io::format_double(p.max_step()) << '\n';
  const nn::Vector params = p.parameters();
  out << "parameters " << params.size() << '\n';
  for (Eigen::Index i = 0; i < params.size(); ++i) out << io::format_double(params[i]) << '\n';
}

void save_policy(const std::filesystem::path& path, const GaussianPolicy& p) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  save_policy(out, p);
}

GaussianPolicy load_policy(std::istream& in) {
  std::string magic;
  int version = 0;
  {
    std::string line;
    if (!std::getline(in, line)) throw LoadError("empty policy file");
    std::istringstream ss(line);
    ss >> magic >> version;
  }
  if (magic != kPolicyMagic) throw LoadError("not a policy file");
  if (version != kPolicyVersion) throw LoadError("unsupported policy format version");

  std::istringstream head(expect_key(in, "head"));
  std::string head_type;
  head >> head_type;
  if (head_type != "gaussian") throw LoadError("unsupported policy head '" + head_type + "'");

  std::istringstream feat(expect_key(in, "features"));
  std::string feat_name;
  feat >> feat_name;
  FeatureKind kind;
  if (feat_name == "learner") {
    kind = FeatureKind::learner;
  } else if (feat_name == "teacher") {
    kind = FeatureKind::teacher;
  } else {
    throw LoadError("unknown feature encoding '" + feat_name + "'");
  }

  std::istringstream layers(expect_key(in, "layers"));
  std::vector<int> sizes;
  for (int s; layers >> s;) sizes.push_back(s);
  if (sizes.size() < 2) throw LoadError("policy needs at least two layer sizes");
  if (sizes.front() != feature_size(kind)) {
    throw LoadError("policy input width " + std::to_string(sizes.front()) +
                    " does not match the " + std::string(feature_name(kind)) +
                    " observation encoding (" + std::to_string(feature_size(kind)) + ")");
  }
  if (sizes.back() != 2) throw LoadError("gaussian policy head must have 2 outputs");
  for (int s : sizes) {
    if (s <= 0) throw LoadError("layer sizes must be positive");
  }

  std::istringstream ms(expect_key(in, "max_step"));
  double max_step = 0.0;
  if (!(ms >> max_step) || !(max_step > 0.0)) throw LoadError("bad max_step");

  std::istringstream pc(expect_key(in, "parameters"));
  std::size_t count = 0;
  if (!(pc >> count)) throw LoadError("bad parameter count");

  std::vector<int> hidden(sizes.begin() + 1, sizes.end() - 1);
  GaussianPolicy policy(kind, hidden, max_step);
  if (count != policy.parameter_count()) {
    throw LoadError("parameter count " + std::to_string(count) + " does not match layer sizes (" +
                    std::to_string(policy.parameter_count()) + ")");
  }
  nn::Vector params(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    std::string tok;
    if (!(in >> tok)) throw LoadError("policy file truncated in parameter block");
    try {
      std::size_t used = 0;
      params[static_cast<Eigen::Index>(i)] = std::stod(tok, &used);
      if (used != tok.size()) throw LoadError("bad parameter '" + tok + "'");
    } catch (const std::logic_error&) {
      throw LoadError("bad parameter '" + tok + "'");
    }
  }
  if (!nn::all_finite(params)) throw LoadError("policy parameters must be finite");
  policy.set_parameters(params);
  return policy;
}

GaussianPolicy load_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  return load_policy(in);
}

}  // namespace vteach
