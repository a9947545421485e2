#pragma once

#include <filesystem>
#include <vector>

#include "wernet/voxel_grid.hpp"

namespace wernet {

// VXG1 layout: "VXG1", u32 header length, JSON {"dims","voxel_size_mm","origin_mm"},
// then nx*ny*nz little-endian float32 values, x-fastest.

std::vector<unsigned char> encode_grid(const VoxelGrid& grid);
/// Throws FormatError (with byte offset) on bad magic, malformed header, or payload/dims mismatch.
VoxelGrid decode_grid(std::vector<unsigned char> bytes);

void save_grid(const VoxelGrid& grid, const std::filesystem::path& path);
VoxelGrid load_grid(const std::filesystem::path& path);

}  // namespace wernet
