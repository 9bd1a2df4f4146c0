#include "vteach/core.hpp"

#include <algorithm>
#include <string>

namespace vteach {

Vec2 clip_norm(Vec2 v, double max_len) {
  const double n = norm(v);
  if (n > max_len && n > 0.0) return v * (max_len / n);
  return v;
}

std::string_view to_string(Role r) {
  switch (r) {
    case Role::target: return "target";
    case Role::teacher: return "teacher";
    case Role::learner: return "learner";
    case Role::expert: return "expert";
  }
  return "target";
}

std::string_view to_string(Task t) { return t == Task::fc ? "FC" : "WESL"; }

Task task_from_string(std::string_view s) {
  if (s == "FC" || s == "fc") return Task::fc;
  if (s == "WESL" || s == "wesl") return Task::wesl;
  throw InvalidArgument("unknown task '" + std::string(s) + "'");
}

Trajectory::Trajectory(std::vector<Point2> points, Role role)
    : points_(std::move(points)), role_(role) {
  if (points_.empty()) throw InvalidArgument("trajectory must have at least one point");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!is_finite(points_[i])) {
      throw InvalidArgument("trajectory point " + std::to_string(i) + " is not finite");
    }
  }
}

Episode::Episode(Task t, Trajectory tgt) : task(t), target(std::move(tgt)) {
  if (task == Task::fc && target.size() != kFcEpisodeLength) {
    throw InvalidArgument("FC episodes have exactly 250 steps, got " +
                          std::to_string(target.size()));
  }
  if (task == Task::wesl && target.size() < 2) {
    throw InvalidArgument("WESL episodes need at least 2 steps");
  }
}

Point2 clamp_to_board(Point2 p, const Board& board) {
  const double lim = board.limit();
  return {std::clamp(p.x, -lim, lim), std::clamp(p.y, -lim, lim)};
}

Trajectory resample_episode(const Trajectory& t, std::size_t n) {
  if (t.size() < 2) throw InvalidArgument("resample_episode needs at least 2 points");
  if (n < 2) throw InvalidArgument("resample_episode needs n >= 2");

  const auto pts = t.points();
  std::vector<double> cum(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) cum[i] = cum[i - 1] + distance(pts[i], pts[i - 1]);
  const double total = cum.back();
  if (total == 0.0) return Trajectory(std::vector<Point2>(n, pts.front()), t.role());

  std::vector<Point2> out;
  out.reserve(n);
  out.push_back(pts.front());
  std::size_t seg = 1;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double s = total * static_cast<double>(k) / static_cast<double>(n - 1);
    while (seg + 1 < pts.size() && cum[seg] < s) ++seg;
    const double len = cum[seg] - cum[seg - 1];
    const double u = len > 0.0 ? (s - cum[seg - 1]) / len : 0.0;
    out.push_back(pts[seg - 1] + (pts[seg] - pts[seg - 1]) * u);
  }
  out.push_back(pts.back());
  return Trajectory(std::move(out), t.role());
}

}  // namespace vteach
