#include "wernet/voxel_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wernet/errors.hpp"

namespace wernet {

void GridGeometry::validate() const {
  if (dims.nx < 1 || dims.ny < 1 || dims.nz < 1) {
    throw ParameterError("grid dims must be >= 1, got " + std::to_string(dims.nx) + "x" + std::to_string(dims.ny) +
                         "x" + std::to_string(dims.nz));
  }
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) {
    throw ParameterError("voxel_size must be positive and finite");
  }
  if (!std::isfinite(origin.x) || !std::isfinite(origin.y) || !std::isfinite(origin.z)) {
    throw ParameterError("grid origin must be finite");
  }
}

Index3 GridGeometry::unflatten(std::size_t flat) const {
  const auto nx = static_cast<std::size_t>(dims.nx);
  const auto ny = static_cast<std::size_t>(dims.ny);
  return {static_cast<int>(flat % nx), static_cast<int>((flat / nx) % ny), static_cast<int>(flat / (nx * ny))};
}

GridGeometry GridGeometry::centered(Dims dims, double voxel_size) {
  GridGeometry g{dims, voxel_size, {}};
  g.validate();
  g.origin = g.extent() * -0.5;
  return g;
}

VoxelGrid::VoxelGrid(const GridGeometry& geometry) : geometry_(geometry) {
  geometry_.validate();
  values_.assign(geometry_.dims.count(), 0.0);
}

VoxelGrid::VoxelGrid(const GridGeometry& geometry, std::vector<double> values)
    : geometry_(geometry), values_(std::move(values)) {
  geometry_.validate();
  if (values_.size() != geometry_.dims.count()) {
    throw ShapeError("voxel value count " + std::to_string(values_.size()) + " does not match dims (" +
                     std::to_string(geometry_.dims.count()) + ")");
  }
}

double VoxelGrid::max_value() const {
  if (values_.empty()) return 0.0;
  return *std::max_element(values_.begin(), values_.end());
}

bool VoxelGrid::is_valid_intensity() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v) && v >= 0.0; });
}

}  // namespace wernet
