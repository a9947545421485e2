#pragma once

#include <span>

#include "wernet/voxel_grid.hpp"

namespace wernet {

/// S_C = (a . b) / (|a| |b|) with 64-bit accumulation. Throws MetricError on a zero-norm operand.
double cosine_similarity(std::span<const double> a, std::span<const double> b);
/// Requires equal dims (ShapeError otherwise).
double cosine_similarity(const VoxelGrid& a, const VoxelGrid& b);

/// D_C = 1 - S_C.
inline double cosine_distance(double similarity) { return 1.0 - similarity; }

}  // namespace wernet
