#pragma once

#include <cstdint>

#include "wernet/camera.hpp"
#include "wernet/image.hpp"
#include "wernet/voxel_grid.hpp"

namespace wernet {

/// Line-integral projection with segment-length weights:
/// pixel(row, col) = sum over impacting voxels of segment_length * value. Rays that miss give 0.
Image forward_project(const VoxelGrid& grid, const CameraPose& pose, int view_id = 0, int threads = 1);

/// Adds i.i.d. N(0, (fraction * max(image))^2) to every pixel. Deterministic given seed.
/// Throws ParameterError for an empty image or a negative fraction.
Image add_noise(const Image& image, double fraction, std::uint64_t seed, bool clamp_nonnegative = false);

}  // namespace wernet
