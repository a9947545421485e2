#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "wernet/geometry.hpp"

namespace wernet {

struct Dims {
  int nx = 1;
  int ny = 1;
  int nz = 1;

  std::size_t count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
  }
  int operator[](int axis) const { return axis == 0 ? nx : (axis == 1 ? ny : nz); }
  bool operator==(const Dims&) const = default;
};

using Index3 = std::array<int, 3>;

/// Physical placement of a voxel lattice: uniform cubic voxels, min-corner at `origin` (mm).
struct GridGeometry {
  Dims dims;
  double voxel_size = 1.0;
  Vec3 origin;

  /// Throws ParameterError unless dims >= 1 and voxel_size > 0.
  void validate() const;

  Vec3 extent() const { return {dims.nx * voxel_size, dims.ny * voxel_size, dims.nz * voxel_size}; }
  Vec3 max_corner() const { return origin + extent(); }
  Vec3 center() const { return origin + extent() * 0.5; }
  double bounding_sphere_diameter() const { return norm(extent()); }

  /// x-fastest flattening: i + j*nx + k*nx*ny.
  std::size_t flat_index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims.nx) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims.ny) * static_cast<std::size_t>(k));
  }
  std::size_t flat_index(const Index3& idx) const { return flat_index(idx[0], idx[1], idx[2]); }
  Index3 unflatten(std::size_t flat) const;
  bool contains(const Index3& idx) const {
    return idx[0] >= 0 && idx[0] < dims.nx && idx[1] >= 0 && idx[1] < dims.ny && idx[2] >= 0 && idx[2] < dims.nz;
  }

  bool operator==(const GridGeometry&) const = default;

  /// Geometry whose center sits at the world origin.
  static GridGeometry centered(Dims dims, double voxel_size);
};

/// Scalar intensity field on a voxel lattice. Values are flattened x-fastest.
class VoxelGrid {
 public:
  VoxelGrid() = default;
  explicit VoxelGrid(const GridGeometry& geometry);
  VoxelGrid(const GridGeometry& geometry, std::vector<double> values);

  const GridGeometry& geometry() const { return geometry_; }
  const Dims& dims() const { return geometry_.dims; }
  double voxel_size() const { return geometry_.voxel_size; }
  const Vec3& origin() const { return geometry_.origin; }
  std::size_t size() const { return values_.size(); }

  double& operator[](std::size_t flat) { return values_[flat]; }
  double operator[](std::size_t flat) const { return values_[flat]; }
  double& at(int i, int j, int k) { return values_[geometry_.flat_index(i, j, k)]; }
  double at(int i, int j, int k) const { return values_[geometry_.flat_index(i, j, k)]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double max_value() const;
  /// True when every value is finite and >= 0.
  bool is_valid_intensity() const;

  bool operator==(const VoxelGrid&) const = default;

 private:
  GridGeometry geometry_;
  std::vector<double> values_;
};

}  // namespace wernet
