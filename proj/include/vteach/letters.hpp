#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include "vteach/core.hpp"

namespace vteach::letters {

inline constexpr std::size_t kLetterCount = 26;

// The bundled letter set: one pen path per letter A-Z, centred on the board,
// each sampled at a point count proportional to its path length (about 72
// points on average).
const std::vector<std::pair<char, Trajectory>>& bundled();

std::vector<Episode> bundled_episodes();

// Writes `<letter>.csv` trajectory files plus `manifest.csv` into `dir`.
void write_dataset(const std::filesystem::path& dir);

// Loads a letter manifest; it must list exactly 26 letters.
std::vector<Episode> load_dataset(const std::filesystem::path& manifest);

}  // namespace vteach::letters
