#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "vteach/runner.hpp"

namespace vteach::config {

// Environment variable naming the default output directory of the CLI.
inline constexpr const char* kOutputDirEnv = "VTEACH_OUT_DIR";

nlohmann::json to_json(const ExperimentConfig& cfg);
// Keys missing from `j` keep the per-task defaults; unknown keys are rejected.
ExperimentConfig from_json(const nlohmann::json& j);

ExperimentConfig load(const std::filesystem::path& path);
void save(const std::filesystem::path& path, const ExperimentConfig& cfg);

// Dotted paths of every leaf key, e.g. `noise.kind`, `learner.a2c.actor_lr`.
std::vector<std::string> leaf_keys(const nlohmann::json& j);

// Sets the leaf at a dotted path from its textual form, parsed according to
// the type already stored there. Throws InvalidArgument for unknown keys.
void set_path(nlohmann::json& j, const std::string& dotted, const std::string& text);

}  // namespace vteach::config
