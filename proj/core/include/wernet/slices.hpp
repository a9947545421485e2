#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wernet/voxel_grid.hpp"

namespace wernet {

/// 2-D cut through a grid. Axis 0 (x = i): rows run down y, columns along z.
/// Axis 1 (y = j): rows along z, columns along x. Axis 2 (z = k): rows run down y, columns along x.
/// Rows that follow y start at the top of the grid (largest j).
struct Slice {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;
};

/// Throws ParameterError for a bad axis or an out-of-range position.
Slice extract_slice(const VoxelGrid& grid, int axis, int position);

/// Writes <prefix>_<axis>_<position>.pgm per requested slice (16-bit, max-scaled) and, when a
/// reference grid is supplied, <prefix>_<axis>_<position>_diff.pgm holding |grid - reference|.
/// Returns the written paths in order.
std::vector<std::filesystem::path> export_cross_sections(const VoxelGrid& grid, int axis,
                                                         const std::vector<int>& positions,
                                                         const std::filesystem::path& out_dir,
                                                         const VoxelGrid* reference = nullptr,
                                                         const std::string& prefix = "slice");

/// Parses "x", "y", "z" or "0", "1", "2".
int parse_axis(const std::string& text);

}  // namespace wernet
