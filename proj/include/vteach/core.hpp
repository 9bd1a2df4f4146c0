#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "vteach/error.hpp"

namespace vteach {

// A location or a displacement on the board. Index 0 is x, index 1 is y.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Point2& operator+=(Point2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Point2& operator-=(Point2 o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Point2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  friend constexpr Point2 operator+(Point2 a, Point2 b) { return a += b; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return a -= b; }
  friend constexpr Point2 operator-(Point2 a) { return {-a.x, -a.y}; }
  friend constexpr Point2 operator*(Point2 a, double s) { return a *= s; }
  friend constexpr Point2 operator*(double s, Point2 a) { return a *= s; }
  friend constexpr bool operator==(Point2, Point2) = default;
};

using Vec2 = Point2;

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

// Scales `v` down so that its length is at most `max_len`.
Vec2 clip_norm(Vec2 v, double max_len);

enum class Role { target, teacher, learner, expert };
enum class Task { fc, wesl };

std::string_view to_string(Role r);
std::string_view to_string(Task t);
Task task_from_string(std::string_view s);

inline constexpr std::size_t kFcEpisodeLength = 250;

// Ordered, non-empty sequence of finite points.
class Trajectory {
 public:
  Trajectory(std::vector<Point2> points, Role role = Role::target);

  std::span<const Point2> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const Point2& operator[](std::size_t i) const { return points_[i]; }
  const Point2& front() const { return points_.front(); }
  const Point2& back() const { return points_.back(); }
  Role role() const { return role_; }

  Trajectory with_role(Role r) const { return Trajectory(points_, r); }

 private:
  std::vector<Point2> points_;
  Role role_;
};

struct Episode {
  Task task;
  Trajectory target;

  Episode(Task task, Trajectory target);
  std::size_t length() const { return target.size(); }
};

struct Board {
  double half_extent = 30.0;
  double padding = 3.0;

  double limit() const { return half_extent - padding; }
};

Point2 clamp_to_board(Point2 p, const Board& board = {});

// Re-samples `t` to `n` points equally spaced in cumulative arc length.
// Endpoints are kept exactly. A trajectory whose points all coincide gives n
// copies of that point.
Trajectory resample_episode(const Trajectory& t, std::size_t n);

}  // namespace vteach
