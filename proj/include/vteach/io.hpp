#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "vteach/core.hpp"

namespace vteach::io {

// Trajectory text format: header `step,x,y`, then one `step,x,y` row per point
// with 0-based, strictly increasing step indices.
void write_trajectory(std::ostream& out, const Trajectory& t);
void write_trajectory(const std::filesystem::path& path, const Trajectory& t);
Trajectory read_trajectory(std::istream& in, Role role = Role::target);
Trajectory read_trajectory(const std::filesystem::path& path, Role role = Role::target);

// `name,path` manifest rows (header `name,path`). Relative paths are resolved
// against the manifest's directory by read_manifest.
using Manifest = std::vector<std::pair<std::string, std::filesystem::path>>;
void write_manifest(const std::filesystem::path& path, const Manifest& entries);
Manifest read_manifest(const std::filesystem::path& path);

// Shortest round-trip decimal representation of `v`.
std::string format_double(double v);

std::vector<std::string> split(const std::string& line, char sep);

}  // namespace vteach::io
