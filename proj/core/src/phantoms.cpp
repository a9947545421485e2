#include "wernet/phantoms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "wernet/errors.hpp"

namespace wernet {

namespace {

void check_fraction(double f, const char* name) {
  if (!(f > 0.0 && f <= 1.0)) {
    throw ParameterError(std::string(name) + " must lie in (0, 1]");
  }
}

// Scales to max 1 and rounds every value to float precision, so grids survive
// the 32-bit file format unchanged.
void normalize_to_unit_max(std::vector<double>& values) {
  const double peak = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
  if (!(peak > 0.0)) return;
  for (double& v : values) v = static_cast<double>(static_cast<float>(v / peak));
}

std::vector<double> jet_field(const GridGeometry& geom, const JetFlameParams& p) {
  check_fraction(p.core_radius_fraction, "core_radius_fraction");
  check_fraction(p.axial_peak_fraction, "axial_peak_fraction");
  check_fraction(p.radial_sigma_fraction, "radial_sigma_fraction");

  const Dims& d = geom.dims;
  // Work in voxel units; the field is scale-free.
  const double radius = 0.5 * std::min(d.nx, d.nz);
  const double axis_x = 0.5 * d.nx;
  const double axis_z = 0.5 * d.nz;
  const double height = d.ny;
  const double y_peak = p.axial_peak_fraction * height;
  const double cone_top = p.core_radius_fraction * radius;
  const double sigma = p.radial_sigma_fraction * radius;
  const double above = std::max(height - y_peak, 1e-12);

  std::vector<double> values(d.count(), 0.0);
  for (int k = 0; k < d.nz; ++k) {
    for (int j = 0; j < d.ny; ++j) {
      const double y = j + 0.5;
      const double u = y / y_peak;
      const double shape = u * std::exp(1.0 - u);
      const double envelope = shape * shape;
      const double r0 = cone_top * std::max(0.0, y - y_peak) / above;
      for (int i = 0; i < d.nx; ++i) {
        const double dx = i + 0.5 - axis_x;
        const double dz = k + 0.5 - axis_z;
        const double r = std::sqrt(dx * dx + dz * dz);
        if (r > radius) continue;
        const double dr = r - r0;
        values[geom.flat_index(i, j, k)] = envelope * std::exp(-dr * dr / (2.0 * sigma * sigma));
      }
    }
  }
  return values;
}

constexpr int kLattice = 8;

class LatticeNoise {
 public:
  explicit LatticeNoise(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (double& v : nodes_) v = uniform(rng);
  }

  // (s, t, q) in [0, 1]^3 spans the whole lattice.
  double sample(double s, double t, double q) const {
    const std::array<double, 3> pos{s * (kLattice - 1), t * (kLattice - 1), q * (kLattice - 1)};
    std::array<int, 3> base{};
    std::array<double, 3> frac{};
    for (int a = 0; a < 3; ++a) {
      base[a] = std::clamp(static_cast<int>(std::floor(pos[a])), 0, kLattice - 2);
      frac[a] = pos[a] - base[a];
    }
    double acc = 0.0;
    for (int corner = 0; corner < 8; ++corner) {
      double w = 1.0;
      std::array<int, 3> idx{};
      for (int a = 0; a < 3; ++a) {
        const int bit = (corner >> a) & 1;
        idx[a] = base[a] + bit;
        w *= bit ? frac[a] : 1.0 - frac[a];
      }
      acc += w * nodes_[idx[0] + kLattice * (idx[1] + kLattice * idx[2])];
    }
    return acc;
  }

 private:
  std::array<double, kLattice * kLattice * kLattice> nodes_{};
};

}  // namespace

CylinderRegion CylinderRegion::inscribed(const Dims& dims) {
  return {0.5 * dims.nx, 0.5 * dims.nz, 0.5 * std::min(dims.nx, dims.nz), 0.0, static_cast<double>(dims.ny)};
}

bool CylinderRegion::contains_voxel(int i, int j, int k) const {
  const double dx = i + 0.5 - center_x;
  const double dz = k + 0.5 - center_z;
  const double y = j + 0.5;
  return dx * dx + dz * dz <= radius * radius && y >= y_min && y <= y_max;
}

VoxelGrid make_jet_flame(Dims dims, double voxel_size, const JetFlameParams& params) {
  const auto geom = GridGeometry::centered(dims, voxel_size);
  auto values = jet_field(geom, params);
  normalize_to_unit_max(values);
  return VoxelGrid(geom, std::move(values));
}

VoxelGrid make_turbulent_flame(Dims dims, double voxel_size, std::uint64_t seed, const JetFlameParams& params) {
  const auto geom = GridGeometry::centered(dims, voxel_size);
  auto values = jet_field(geom, params);
  const LatticeNoise noise(seed);
  for (int k = 0; k < dims.nz; ++k) {
    for (int j = 0; j < dims.ny; ++j) {
      for (int i = 0; i < dims.nx; ++i) {
        double& v = values[geom.flat_index(i, j, k)];
        v *= 0.5 + noise.sample((i + 0.5) / dims.nx, (j + 0.5) / dims.ny, (k + 0.5) / dims.nz);
      }
    }
  }
  const double peak = *std::max_element(values.begin(), values.end());
  for (double& v : values) {
    if (v < 0.05 * peak) v = 0.0;
  }
  normalize_to_unit_max(values);
  return VoxelGrid(geom, std::move(values));
}

VoxelGrid make_randomized_homogeneous(Dims dims, double voxel_size, std::uint64_t seed,
                                      std::optional<CylinderRegion> region) {
  const auto geom = GridGeometry::centered(dims, voxel_size);
  const CylinderRegion cyl = region.value_or(CylinderRegion::inscribed(dims));
  constexpr double kSlack = 1e-9;
  if (!(cyl.radius > 0.0) || cyl.center_x - cyl.radius < -kSlack || cyl.center_x + cyl.radius > dims.nx + kSlack ||
      cyl.center_z - cyl.radius < -kSlack || cyl.center_z + cyl.radius > dims.nz + kSlack || cyl.y_min < -kSlack ||
      cyl.y_max > dims.ny + kSlack || !(cyl.y_min < cyl.y_max)) {
    throw ParameterError("fill cylinder does not fit inside the grid");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.2, 1.0);
  std::vector<double> values(dims.count(), 0.0);
  for (int k = 0; k < dims.nz; ++k) {
    for (int j = 0; j < dims.ny; ++j) {
      for (int i = 0; i < dims.nx; ++i) {
        if (cyl.contains_voxel(i, j, k)) {
          values[geom.flat_index(i, j, k)] = static_cast<double>(static_cast<float>(uniform(rng)));
        }
      }
    }
  }
  return VoxelGrid(geom, std::move(values));
}

}  // namespace wernet
