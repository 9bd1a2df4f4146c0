#include "vteach/letters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "vteach/io.hpp"

namespace vteach::letters {

namespace {

constexpr double kBoardScale = 14.0;  // letter box is 1 x 1.4 before scaling
constexpr double kMeanPoints = 72.0;
constexpr std::size_t kMinPoints = 24;

class Pen {
 public:
  Pen& to(double x, double y) {
    pts_.push_back({x, y});
    return *this;
  }
  // Elliptic arc from angle a0 to a1 (degrees), counter-clockwise when a1 > a0.
  Pen& arc(double cx, double cy, double rx, double ry, double a0, double a1) {
    const int segments = std::max(4, static_cast<int>(std::abs(a1 - a0) / 10.0));
    for (int i = 0; i <= segments; ++i) {
      const double a = (a0 + (a1 - a0) * i / segments) * std::numbers::pi / 180.0;
      pts_.push_back({cx + rx * std::cos(a), cy + ry * std::sin(a)});
    }
    return *this;
  }
  std::vector<Point2> done() { return std::move(pts_); }

 private:
  std::vector<Point2> pts_;
};

std::vector<Point2> outline(char c) {
  switch (c) {
    case 'A': return Pen().to(0, 0).to(0.5, 1.4).to(1, 0).to(0.8, 0.56).to(0.2, 0.56).done();
    case 'B':
      return Pen().to(0, 0).to(0, 1.4).to(0.4, 1.4).arc(0.4, 1.05, 0.35, 0.35, 90, -90)
          .to(0, 0.7).to(0.5, 0.7).arc(0.5, 0.35, 0.4, 0.35, 90, -90).to(0, 0).done();
    case 'C': return Pen().arc(0.55, 0.7, 0.5, 0.7, 45, 315).done();
    case 'D': return Pen().to(0, 0).to(0, 1.4).to(0.3, 1.4).arc(0.3, 0.7, 0.65, 0.7, 90, -90).to(0, 0).done();
    case 'E': return Pen().to(1, 1.4).to(0, 1.4).to(0, 0.7).to(0.7, 0.7).to(0, 0.7).to(0, 0).to(1, 0).done();
    case 'F': return Pen().to(1, 1.4).to(0, 1.4).to(0, 0.7).to(0.7, 0.7).to(0, 0.7).to(0, 0).done();
    case 'G': return Pen().arc(0.5, 0.7, 0.5, 0.7, 45, 360).to(0.55, 0.7).done();
    case 'H': return Pen().to(0, 1.4).to(0, 0).to(0, 0.7).to(1, 0.7).to(1, 1.4).to(1, 0).done();
    case 'I': return Pen().to(0.2, 1.4).to(0.8, 1.4).to(0.5, 1.4).to(0.5, 0).to(0.2, 0).to(0.8, 0).done();
    case 'J': return Pen().to(0.3, 1.4).to(1, 1.4).to(0.7, 1.4).to(0.7, 0.3).arc(0.4, 0.3, 0.3, 0.3, 0, -180).done();
    case 'K': return Pen().to(0, 1.4).to(0, 0).to(0, 0.6).to(0.9, 1.4).to(0.3, 0.85).to(1, 0).done();
    case 'L': return Pen().to(0, 1.4).to(0, 0).to(0.9, 0).done();
    case 'M': return Pen().to(0, 0).to(0, 1.4).to(0.5, 0.6).to(1, 1.4).to(1, 0).done();
    case 'N': return Pen().to(0, 0).to(0, 1.4).to(1, 0).to(1, 1.4).done();
    case 'O': return Pen().arc(0.5, 0.7, 0.5, 0.7, 90, 450).done();
    case 'P': return Pen().to(0, 0).to(0, 1.4).to(0.5, 1.4).arc(0.5, 1.05, 0.4, 0.35, 90, -90).to(0, 0.7).done();
    case 'Q': return Pen().arc(0.5, 0.7, 0.5, 0.7, 90, 450).to(0.6, 0.3).to(1.05, -0.1).done();
    case 'R':
      return Pen().to(0, 0).to(0, 1.4).to(0.5, 1.4).arc(0.5, 1.05, 0.4, 0.35, 90, -90)
          .to(0, 0.7).to(0.4, 0.7).to(1, 0).done();
    case 'S':
      return Pen().arc(0.5, 1.05, 0.45, 0.35, 30, 270).arc(0.5, 0.35, 0.45, 0.35, 90, -150).done();
    case 'T': return Pen().to(0, 1.4).to(1, 1.4).to(0.5, 1.4).to(0.5, 0).done();
    case 'U': return Pen().to(0, 1.4).to(0, 0.4).arc(0.5, 0.4, 0.5, 0.4, 180, 360).to(1, 1.4).done();
    case 'V': return Pen().to(0, 1.4).to(0.5, 0).to(1, 1.4).done();
    case 'W': return Pen().to(0, 1.4).to(0.25, 0).to(0.5, 0.9).to(0.75, 0).to(1, 1.4).done();
    case 'X': return Pen().to(0, 1.4).to(1, 0).to(1, 1.4).to(0, 0).done();
    case 'Y': return Pen().to(0, 1.4).to(0.5, 0.7).to(1, 1.4).to(0.5, 0.7).to(0.5, 0).done();
    case 'Z': return Pen().to(0, 1.4).to(1, 1.4).to(0, 0).to(1, 0).done();
    default: break;
  }
  throw InvalidArgument(std::string("no outline for letter '") + c + "'");
}

double path_length(const std::vector<Point2>& pts) {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += distance(pts[i], pts[i - 1]);
  return len;
}

std::vector<std::pair<char, Trajectory>> build() {
  std::vector<std::vector<Point2>> paths;
  double total = 0.0;
  for (char c = 'A'; c <= 'Z'; ++c) {
    auto pts = outline(c);
    for (auto& p : pts) p = Point2{(p.x - 0.5) * kBoardScale, (p.y - 0.7) * kBoardScale};
    total += path_length(pts);
    paths.push_back(std::move(pts));
  }
  const double mean_len = total / static_cast<double>(paths.size());
  std::vector<std::pair<char, Trajectory>> out;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto n = std::max(kMinPoints, static_cast<std::size_t>(std::lround(
                                            kMeanPoints * path_length(paths[i]) / mean_len)));
    out.emplace_back(static_cast<char>('A' + i),
                     resample_episode(Trajectory(std::move(paths[i]), Role::target), n));
  }
  return out;
}

}  // namespace

const std::vector<std::pair<char, Trajectory>>& bundled() {
  static const auto letters = build();
  return letters;
}

std::vector<Episode> bundled_episodes() {
  std::vector<Episode> out;
  for (const auto& [c, t] : bundled()) out.emplace_back(Task::wesl, t);
  return out;
}

void write_dataset(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  io::Manifest manifest;
  for (const auto& [c, t] : bundled()) {
    const std::string file = std::string(1, c) + ".csv";
    io::write_trajectory(dir / file, t);
    manifest.emplace_back(std::string(1, c), file);
  }
  io::write_manifest(dir / "manifest.csv", manifest);
}

std::vector<Episode> load_dataset(const std::filesystem::path& manifest) {
  const auto entries = io::read_manifest(manifest);
  if (entries.size() != kLetterCount) {
    throw LoadError("letter manifest must list exactly 26 letters, found " +
                    std::to_string(entries.size()));
  }
  std::vector<Episode> out;
  for (const auto& [name, path] : entries) {
    try {
      out.emplace_back(Task::wesl, io::read_trajectory(path, Role::target));
    } catch (const InvalidArgument& e) {
      throw LoadError(name + ": " + e.what());
    }
  }
  return out;
}

}  // namespace vteach::letters
