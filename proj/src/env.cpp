#include "vteach/env.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace vteach {

StiffnessModality modality_from_name(std::string_view name) {
  for (const auto* m : {&modality::HH, &modality::LL, &modality::LH, &modality::HL}) {
    if (m->name == name) return *m;
  }
  throw InvalidArgument("unknown stiffness modality '" + std::string(name) + "'");
}

std::string_view to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::none: return "none";
    case NoiseKind::normal: return "normal";
    case NoiseKind::uniform_circle: return "uniform";
  }
  return "none";
}

NoiseKind noise_kind_from_string(std::string_view s) {
  if (s == "none") return NoiseKind::none;
  if (s == "normal") return NoiseKind::normal;
  if (s == "uniform" || s == "uniform_circle") return NoiseKind::uniform_circle;
  throw InvalidArgument("unknown noise kind '" + std::string(s) + "'");
}

void NoiseSpec::validate() const {
  if (!std::isfinite(value) || value < 0.0) throw InvalidArgument("noise value must be >= 0");
  if (kind == NoiseKind::none && value != 0.0) {
    throw InvalidArgument("noise kind 'none' requires value 0");
  }
  if (kind != NoiseKind::none && value == 0.0) {
    throw InvalidArgument("zero noise must use kind 'none'");
  }
}

double OffsetStrategy::draw(Rng& rng) const {
  if (kind == OffsetKind::constant) return value;
  if (upper < 1) throw InvalidArgument("random offset range must be non-empty");
  std::uniform_int_distribution<int> dist(0, upper - 1);
  return static_cast<double>(dist(rng));
}

void EnvParams::validate() const {
  if (!(mitigation > 0.0 && mitigation <= 1.0)) {
    throw InvalidArgument("mitigation factor c must be in (0, 1]");
  }
  if (!(stiffness_scale > 0.0)) throw InvalidArgument("stiffness_scale must be > 0");
  noise.validate();
}

Point2 fc_target(int s, double alpha) {
  const double phi = static_cast<double>(s) / 30.0 + alpha;
  const double x = 3.0 * std::sin(1.8 * phi) + 3.4 * std::sin(1.8 * phi) +
                   2.5 * std::sin(1.82 * phi) + 4.3 * std::sin(2.34 * phi);
  const double y = 3.0 * std::sin(1.1 * phi) + 3.2 * std::sin(3.6 * phi) +
                   3.8 * std::sin(2.5 * phi) + 4.8 * std::sin(1.48 * phi);
  return {x, y};
}

Trajectory fc_target_trajectory(double alpha) {
  std::vector<Point2> pts;
  pts.reserve(kFcEpisodeLength);
  for (std::size_t s = 0; s < kFcEpisodeLength; ++s) pts.push_back(fc_target(static_cast<int>(s), alpha));
  return Trajectory(std::move(pts), Role::target);
}

Episode make_fc_episode(double alpha) { return Episode(Task::fc, fc_target_trajectory(alpha)); }

Point2 obscure_target(Point2 target, const NoiseSpec& noise, Rng& rng) {
  switch (noise.kind) {
    case NoiseKind::none:
      return target;
    case NoiseKind::normal: {
      std::normal_distribution<double> n(0.0, noise.value);
      const double dx = n(rng);
      const double dy = n(rng);
      return target + Vec2{dx, dy};
    }
    case NoiseKind::uniform_circle: {
      std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
      const double theta = u(rng);
      return target + Vec2{std::cos(theta), std::sin(theta)} * noise.value;
    }
  }
  return target;
}

Forces coupling_forces(Point2 learner, Point2 teacher, const StiffnessModality& m, double scale) {
  const Vec2 d = teacher - learner;
  return {d * (scale * m.k_learner), -d * (scale * m.k_teacher)};
}

EnvState initial_state(const Episode& episode, const EnvParams& params, Rng& rng) {
  EnvState s;
  s.step = 0;
  s.target = episode.target[0];
  s.obscured_target = obscure_target(s.target, params.noise, rng);
  s.teacher = clamp_to_board(s.target, params.board);
  s.learner = s.teacher;
  return s;
}

EnvState step_env(const EnvState& state, Vec2 a_learner, Vec2 a_teacher, const EnvParams& params,
                  const Episode& episode, Rng& rng) {
  if (state.step + 1 >= episode.length()) {
    throw EpisodeExhausted("episode of length " + std::to_string(episode.length()) +
                           " has no step after " + std::to_string(state.step));
  }
  const double c = params.mitigation;
  EnvState next;
  next.step = state.step + 1;
  if (params.connected) {
    const Forces f =
        coupling_forces(state.learner, state.teacher, params.modality, params.stiffness_scale);
    next.learner = clamp_to_board(state.learner + (f.learner + a_learner) * c, params.board);
    next.teacher = clamp_to_board(state.teacher + f.teacher + a_teacher, params.board);
    next.forces =
        coupling_forces(next.learner, next.teacher, params.modality, params.stiffness_scale);
  } else {
    next.learner = clamp_to_board(state.learner + a_learner * c, params.board);
    next.teacher = clamp_to_board(state.teacher + a_teacher, params.board);
  }
  next.target = episode.target[next.step];
  next.obscured_target = obscure_target(next.target, params.noise, rng);
  return next;
}

Environment::Environment(EnvParams params) : Environment(params, Rng(params.seed)) {}

Environment::Environment(EnvParams params, Rng rng)
    : params_(std::move(params)), rng_(rng), episode_(make_fc_episode(3.0)) {
  params_.validate();
}

const EnvState& Environment::reset(Episode episode) {
  episode_ = std::move(episode);
  state_ = initial_state(episode_, params_, rng_);
  return state_;
}

const EnvState& Environment::step(Vec2 a_learner, Vec2 a_teacher) {
  state_ = step_env(state_, a_learner, a_teacher, params_, episode_, rng_);
  return state_;
}

}  // namespace vteach
