#pragma once

#include <span>

#include "vteach/core.hpp"

namespace vteach {

struct AlignmentResult {
  Trajectory aligned_a;  // centred, unit root-mean-square norm
  Trajectory aligned_b;  // centred, unit RMS norm, rotated onto aligned_a
  double disparity = 0.0;  // residual sum of squares at unit Frobenius norm, in [0, 1]
  double rotation = 0.0;  // radians, applied to b
  double scale = 1.0;  // optimal scale of standardized b onto standardized a
};

// Least-squares alignment of b onto a under translation, uniform scaling and
// rotation (no reflection). Both trajectories must have the same length >= 2
// and non-zero spread; otherwise throws AlignmentError.
AlignmentResult procrustes_align(const Trajectory& a, const Trajectory& b);

// Discrete Fréchet distance between two point sequences.
double frechet_distance(std::span<const Point2> a, std::span<const Point2> b);

struct SimilarityScore {
  double value = 0.0;
  bool degenerate = false;  // produced trajectory had no spread
};

inline constexpr std::size_t kMinSimilaritySamples = 32;

// Shape similarity in [0, 1]: both curves are resampled to the shorter length
// (at least 32 points), Procrustes-aligned, and scored as 1 - d_F / 2 where
// d_F is the discrete Fréchet distance between the aligned unit-RMS curves.
SimilarityScore similarity(const Trajectory& target, const Trajectory& produced);

}  // namespace vteach
