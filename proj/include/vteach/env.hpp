#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "vteach/core.hpp"

namespace vteach {

using Rng = std::mt19937_64;

// Linear (x, y) stiffness of each end of the elastic coupling, in N/m.
struct StiffnessModality {
  std::string name;
  double k_learner = 0.0;
  double k_teacher = 0.0;
};

namespace modality {
inline const StiffnessModality HH{"HH", 180.0, 180.0};
inline const StiffnessModality LL{"LL", 60.0, 60.0};
inline const StiffnessModality LH{"LH", 60.0, 180.0};
inline const StiffnessModality HL{"HL", 180.0, 60.0};
}  // namespace modality

StiffnessModality modality_from_name(std::string_view name);

enum class NoiseKind { none, normal, uniform_circle };

std::string_view to_string(NoiseKind k);
NoiseKind noise_kind_from_string(std::string_view s);

// `value` is the standard deviation (normal) or the circle radius
// (uniform_circle), in board units.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::none;
  double value = 0.0;

  void validate() const;
};

enum class OffsetKind { constant, random_integer };

// Phase offset of the FC target. random_integer draws uniformly from
// {0, ..., upper - 1} per episode.
struct OffsetStrategy {
  OffsetKind kind = OffsetKind::constant;
  double value = 3.0;
  int upper = 10;

  double draw(Rng& rng) const;
};

inline constexpr double kDefaultStiffnessScale = 0.003;
inline constexpr double kDefaultMitigation = 0.5;

struct EnvParams {
  StiffnessModality modality = modality::LH;
  bool connected = true;
  NoiseSpec noise;
  double mitigation = kDefaultMitigation;
  double stiffness_scale = kDefaultStiffnessScale;
  std::uint64_t seed = 0;
  Board board;

  void validate() const;
};

// FC target at step `s` of an episode with phase offset `alpha`.
Point2 fc_target(int s, double alpha);
Trajectory fc_target_trajectory(double alpha);
Episode make_fc_episode(double alpha);

Point2 obscure_target(Point2 target, const NoiseSpec& noise, Rng& rng);

struct Forces {
  Vec2 learner;
  Vec2 teacher;
};

// Spring forces on each end of the coupling, in board units per step.
Forces coupling_forces(Point2 learner, Point2 teacher, const StiffnessModality& m, double scale);

struct EnvState {
  std::size_t step = 0;
  Point2 target;
  Point2 obscured_target;
  Point2 teacher;
  Point2 learner;
  // Coupling forces at the current positions; zero when not connected.
  Forces forces;
};

// Both agents start on the episode's first target point.
EnvState initial_state(const Episode& episode, const EnvParams& params, Rng& rng);

// Advances one step. Throws EpisodeExhausted at the last step of the episode.
EnvState step_env(const EnvState& state, Vec2 a_learner, Vec2 a_teacher, const EnvParams& params,
                  const Episode& episode, Rng& rng);

// Owns an episode, its RNG and the running state.
class Environment {
 public:
  explicit Environment(EnvParams params);
  Environment(EnvParams params, Rng rng);

  const EnvState& reset(Episode episode);
  const EnvState& step(Vec2 a_learner, Vec2 a_teacher);

  const EnvState& state() const { return state_; }
  const Episode& episode() const { return episode_; }
  const EnvParams& params() const { return params_; }
  bool done() const { return state_.step + 1 >= episode_.length(); }
  Rng& rng() { return rng_; }

 private:
  EnvParams params_;
  Rng rng_;
  Episode episode_;
  EnvState state_;
};

}  // namespace vteach
