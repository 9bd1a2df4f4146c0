#include "vteach/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace vteach::io {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

namespace {

std::string strip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && s[i] == ' ') ++i;
  return s.substr(i);
}

double parse_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const std::string t = strip(s);
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw LoadError("line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

void write_trajectory(std::ostream& out, const Trajectory& t) {
  out << "step,x,y\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << i << ',' << format_double(t[i].x) << ',' << format_double(t[i].y) << '\n';
  }
}

void write_trajectory(const std::filesystem::path& path, const Trajectory& t) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_trajectory(out, t);
}

Trajectory read_trajectory(std::istream& in, Role role) {
  std::string line;
  if (!std::getline(in, line) || strip(line) != "step,x,y") {
    throw LoadError("trajectory file must start with header 'step,x,y'");
  }
  std::vector<Point2> pts;
  long prev_step = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (strip(line).empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 3) {
      throw LoadError("line " + std::to_string(line_no) + ": expected 3 columns");
    }
    const double step = parse_double(cols[0], line_no);
    if (step != static_cast<double>(static_cast<long>(step)) || static_cast<long>(step) <= prev_step) {
      throw LoadError("line " + std::to_string(line_no) + ": step indices must be strictly increasing integers");
    }
    prev_step = static_cast<long>(step);
    pts.push_back({parse_double(cols[1], line_no), parse_double(cols[2], line_no)});
  }
  if (pts.empty()) throw LoadError("trajectory file has no points");
  try {
    return Trajectory(std::move(pts), role);
  } catch (const InvalidArgument& e) {
    throw LoadError(e.what());
  }
}

Trajectory read_trajectory(const std::filesystem::path& path, Role role) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  return read_trajectory(in, role);
}

void write_manifest(const std::filesystem::path& path, const Manifest& entries) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "name,path\n";
  for (const auto& [name, p] : entries) out << name << ',' << p.generic_string() << '\n';
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open manifest " + path.string());
  std::string line;
  if (!std::getline(in, line) || strip(line) != "name,path") {
    throw LoadError("manifest must start with header 'name,path'");
  }
  Manifest out;
  const auto base = path.parent_path();
  while (std::getline(in, line)) {
    line = strip(line);
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 2) throw LoadError("manifest row must be 'name,path': " + line);
    std::filesystem::path p(cols[1]);
    if (p.is_relative()) p = base / p;
    out.emplace_back(cols[0], p);
  }
  return out;
}

}  // namespace vteach::io
