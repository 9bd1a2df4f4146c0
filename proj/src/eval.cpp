#include "vteach/eval.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace vteach {

namespace {

constexpr double kMinSpread = 1e-9;

struct Centred {
  std::vector<Point2> points;
  double frobenius = 0.0;
};

Centred centre(std::span<const Point2> pts) {
  Point2 mean;
  for (const auto& p : pts) mean += p;
  mean *= 1.0 / static_cast<double>(pts.size());
  Centred c;
  c.points.reserve(pts.size());
  double ss = 0.0;
  for (const auto& p : pts) {
    const Point2 q = p - mean;
    ss += dot(q, q);
    c.points.push_back(q);
  }
  c.frobenius = std::sqrt(ss);
  return c;
}

}  // namespace

AlignmentResult procrustes_align(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size()) throw AlignmentError("procrustes_align needs equal-length trajectories");
  if (a.size() < 2) throw AlignmentError("procrustes_align needs at least 2 points");
  Centred ca = centre(a.points());
  Centred cb = centre(b.points());
  if (ca.frobenius < kMinSpread || cb.frobenius < kMinSpread) {
    throw AlignmentError("cannot align a degenerate trajectory (all points coincide)");
  }
  for (auto& p : ca.points) p *= 1.0 / ca.frobenius;
  for (auto& p : cb.points) p *= 1.0 / cb.frobenius;

  // <a, R(θ) b> = cos θ * sc + sin θ * ss, maximised at θ = atan2(ss, sc).
  double sc = 0.0;
  double ss = 0.0;
  for (std::size_t i = 0; i < ca.points.size(); ++i) {
    const Point2 pa = ca.points[i];
    const Point2 pb = cb.points[i];
    sc += pa.x * pb.x + pa.y * pb.y;
    ss += pa.y * pb.x - pa.x * pb.y;
  }
  const double theta = std::atan2(ss, sc);
  const double s = std::hypot(sc, ss);
  const double ct = std::cos(theta);
  const double st = std::sin(theta);

  const double rms = std::sqrt(static_cast<double>(ca.points.size()));
  std::vector<Point2> out_a;
  std::vector<Point2> out_b;
  out_a.reserve(ca.points.size());
  out_b.reserve(cb.points.size());
  for (std::size_t i = 0; i < ca.points.size(); ++i) {
    out_a.push_back(ca.points[i] * rms);
    const Point2 pb = cb.points[i];
    out_b.push_back(Point2{ct * pb.x - st * pb.y, st * pb.x + ct * pb.y} * rms);
  }
  return AlignmentResult{Trajectory(std::move(out_a), a.role()), Trajectory(std::move(out_b), b.role()),
                         std::max(0.0, 1.0 - s * s), theta, s};
}

// The recurrence only compares distances, so it runs on squared distances and
// takes one square root at the end.
double frechet_distance(std::span<const Point2> a, std::span<const Point2> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("frechet_distance needs non-empty sequences");
  const auto d2 = [](Point2 p, Point2 q) {
    const double dx = p.x - q.x;
    const double dy = p.y - q.y;
    return dx * dx + dy * dy;
  };
  const std::size_t m = b.size();
  std::vector<double> prev(m);
  std::vector<double> cur(m);
  prev[0] = d2(a[0], b[0]);
  for (std::size_t j = 1; j < m; ++j) prev[j] = std::max(prev[j - 1], d2(a[0], b[j]));
  for (std::size_t i = 1; i < a.size(); ++i) {
    cur[0] = std::max(prev[0], d2(a[i], b[0]));
    for (std::size_t j = 1; j < m; ++j) {
      const double reach = std::min({prev[j], cur[j - 1], prev[j - 1]});
      cur[j] = std::max(reach, d2(a[i], b[j]));
    }
    std::swap(prev, cur);
  }
  return std::sqrt(prev[m - 1]);
}

SimilarityScore similarity(const Trajectory& target, const Trajectory& produced) {
  if (target.size() < 2 || produced.size() < 2) {
    throw InvalidArgument("similarity needs trajectories of at least 2 points");
  }
  const std::size_t n = std::max(kMinSimilaritySamples, std::min(target.size(), produced.size()));
  const Trajectory t = resample_episode(target, n);
  const Trajectory p = resample_episode(produced, n);
  if (centre(p.points()).frobenius < kMinSpread) return {0.0, true};
  const AlignmentResult al = procrustes_align(t, p);
  const double d = frechet_distance(al.aligned_a.points(), al.aligned_b.points());
  return {std::clamp(1.0 - d / 2.0, 0.0, 1.0), false};
}

}  // namespace vteach
