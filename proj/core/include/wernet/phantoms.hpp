#pragma once

#include <cstdint>
#include <optional>

#include "wernet/voxel_grid.hpp"

namespace wernet {

/// Shape controls of the hollow-cone jet, all relative to the grid.
///  - core_radius_fraction: cone radius at the top of the grid, as a fraction of the cylinder radius.
///  - axial_peak_fraction: height of maximum emission, as a fraction of ny.
///  - radial_sigma_fraction: Gaussian shell width, as a fraction of the cylinder radius.
struct JetFlameParams {
  double core_radius_fraction = 0.5;
  double axial_peak_fraction = 0.3;
  double radial_sigma_fraction = 0.2;
};

/// Vertical cylinder in voxel units (x/z center, radius, y range), relative to the grid min corner.
struct CylinderRegion {
  double center_x = 0.0;
  double center_z = 0.0;
  double radius = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  /// The largest upright cylinder inscribed in the grid.
  static CylinderRegion inscribed(const Dims& dims);
  bool contains_voxel(int i, int j, int k) const;
};

/// Axisymmetric jet about the vertical axis:
///   value(r, y) = env(y) * exp(-(r - r0(y))^2 / (2 sigma^2)), zero for r > R,
/// where the cone radius r0 widens linearly above the peak height and env peaks at the
/// configured height. The result is normalized so the maximum voxel is 1.
VoxelGrid make_jet_flame(Dims dims, double voxel_size, const JetFlameParams& params = {});

/// Jet base field modulated by seeded trilinear lattice noise on an 8x8x8 lattice,
/// thresholded at 5% of its maximum and renormalized to 1.
VoxelGrid make_turbulent_flame(Dims dims, double voxel_size, std::uint64_t seed,
                               const JetFlameParams& params = {});

/// Independent uniform values in [0.2, 1.0] inside `region` (defaults to the inscribed cylinder), zero outside.
VoxelGrid make_randomized_homogeneous(Dims dims, double voxel_size, std::uint64_t seed,
                                      std::optional<CylinderRegion> region = std::nullopt);

}  // namespace wernet
