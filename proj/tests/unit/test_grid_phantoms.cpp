#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "wernet/errors.hpp"
#include "wernet/grid_io.hpp"
#include "wernet/metrics.hpp"
#include "wernet/phantoms.hpp"

using namespace wernet;

TEST(VoxelGrid, FlatIndexIsXFastestAndBijective) {
  const auto g = GridGeometry::centered({3, 4, 5}, 1.0);
  std::vector<bool> seen(g.dims.count(), false);
  for (int k = 0; k < 5; ++k) {
    for (int j = 0; j < 4; ++j) {
      for (int i = 0; i < 3; ++i) {
        const std::size_t f = g.flat_index(i, j, k);
        EXPECT_EQ(f, static_cast<std::size_t>(i + j * 3 + k * 12));
        EXPECT_FALSE(seen[f]);
        seen[f] = true;
        EXPECT_EQ(g.unflatten(f), (Index3{i, j, k}));
      }
    }
  }
}

TEST(VoxelGrid, RejectsDegenerateGeometry) {
  EXPECT_THROW(GridGeometry::centered({0, 4, 4}, 1.0).validate(), ParameterError);
  EXPECT_THROW(GridGeometry::centered({4, 4, 4}, 0.0).validate(), ParameterError);
  EXPECT_THROW(VoxelGrid(GridGeometry::centered({2, 2, 2}, 1.0), std::vector<double>(7)), ShapeError);
}

TEST(VoxelGrid, CenteredGeometrySitsOnTheOrigin) {
  const auto g = GridGeometry::centered({30, 140, 30}, 0.5);
  EXPECT_DOUBLE_EQ(g.center().x, 0.0);
  EXPECT_DOUBLE_EQ(g.center().y, 0.0);
  EXPECT_DOUBLE_EQ(g.center().z, 0.0);
  EXPECT_DOUBLE_EQ(g.extent().y, 70.0);
}

TEST(JetFlame, PeakOnAxisIsOne) {
  // ny = 105 puts the peak height (0.3 * 105 = 31.5) exactly on the center of row 31,
  // odd nx/nz put a voxel center on the axis.
  const VoxelGrid g = make_jet_flame({31, 105, 31}, 0.5);
  EXPECT_EQ(g.at(15, 31, 15), 1.0);
  EXPECT_EQ(g.max_value(), 1.0);
}

TEST(JetFlame, ZeroOutsideBoundingCylinder) {
  const Dims d{30, 140, 30};
  const VoxelGrid g = make_jet_flame(d, 0.5);
  const auto cyl = CylinderRegion::inscribed(d);
  for (int k = 0; k < d.nz; ++k)
    for (int j = 0; j < d.ny; ++j)
      for (int i = 0; i < d.nx; ++i)
        if (!cyl.contains_voxel(i, j, k)) {
          ASSERT_EQ(g.at(i, j, k), 0.0) << i << ',' << j << ',' << k;
        }
  EXPECT_TRUE(g.is_valid_intensity());
}

TEST(JetFlame, RotationalSymmetryAboutVerticalAxis) {
  const Dims d{30, 140, 30};
  const VoxelGrid g = make_jet_flame(d, 0.5);
  double worst = 0.0;
  for (int k = 0; k < d.nz; ++k)
    for (int j = 0; j < d.ny; ++j)
      for (int i = 0; i < d.nx; ++i) {
        // 90 degrees about y: (dx, dz) -> (dz, -dx)
        const int ri = k;
        const int rk = d.nx - 1 - i;
        worst = std::max(worst, std::abs(g.at(i, j, k) - g.at(ri, j, rk)));
      }
  EXPECT_LE(worst, 1e-6);
}

TEST(JetFlame, RejectsBadFractions) {
  JetFlameParams p;
  p.axial_peak_fraction = 0.0;
  EXPECT_THROW(make_jet_flame({8, 8, 8}, 1.0, p), ParameterError);
}

TEST(TurbulentFlame, DeterministicAndBounded) {
  const Dims d{16, 64, 16};
  const VoxelGrid a = make_turbulent_flame(d, 0.5, 7);
  const VoxelGrid b = make_turbulent_flame(d, 0.5, 7);
  EXPECT_EQ(a, b);
  for (double v : a.values()) {
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
  EXPECT_EQ(a.max_value(), 1.0);
}

TEST(TurbulentFlame, SeedsGiveDifferentFields) {
  const Dims d{16, 64, 16};
  const VoxelGrid a = make_turbulent_flame(d, 0.5, 1);
  const VoxelGrid b = make_turbulent_flame(d, 0.5, 2);
  EXPECT_LT(cosine_similarity(a, b), 0.999);
}

TEST(TurbulentFlame, ZeroOutsideCylinder) {
  const Dims d{16, 64, 16};
  const VoxelGrid a = make_turbulent_flame(d, 0.5, 3);
  const auto cyl = CylinderRegion::inscribed(d);
  for (int k = 0; k < d.nz; ++k)
    for (int j = 0; j < d.ny; ++j)
      for (int i = 0; i < d.nx; ++i)
        if (!cyl.contains_voxel(i, j, k)) ASSERT_EQ(a.at(i, j, k), 0.0);
}

TEST(RandomizedHomogeneous, RangeAndMean) {
  const Dims d{30, 140, 30};
  const VoxelGrid g = make_randomized_homogeneous(d, 0.5, 11);
  const auto cyl = CylinderRegion::inscribed(d);
  double sum = 0.0;
  std::size_t count = 0;
  for (int k = 0; k < d.nz; ++k)
    for (int j = 0; j < d.ny; ++j)
      for (int i = 0; i < d.nx; ++i) {
        const double v = g.at(i, j, k);
        if (cyl.contains_voxel(i, j, k)) {
          ASSERT_GE(v, 0.2);
          ASSERT_LE(v, 1.0);
          sum += v;
          ++count;
        } else {
          ASSERT_EQ(v, 0.0);
        }
      }
  ASSERT_GE(count, 10000u);
  EXPECT_NEAR(sum / count, 0.6, 0.02);
  EXPECT_EQ(g, make_randomized_homogeneous(d, 0.5, 11));
}

TEST(RandomizedHomogeneous, CustomRegionMustFit) {
  CylinderRegion r{4, 4, 6, 0, 8};
  EXPECT_THROW(make_randomized_homogeneous({8, 8, 8}, 1.0, 1, r), ParameterError);
  CylinderRegion ok{4, 4, 2, 2, 6};
  const VoxelGrid g = make_randomized_homogeneous({8, 8, 8}, 1.0, 1, ok);
  EXPECT_EQ(g.at(0, 4, 0), 0.0);
  EXPECT_GT(g.at(4, 4, 4), 0.0);
}

TEST(GridIo, RoundTripIsBitExactAcrossSeeds) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dim(1, 6);
    std::uniform_real_distribution<double> val(0.0, 10.0);
    const auto geom = GridGeometry::centered({dim(rng), dim(rng), dim(rng)}, 0.25 + 0.01 * seed);
    VoxelGrid g(geom);
    for (double& v : g.values()) v = static_cast<float>(val(rng));
    const VoxelGrid back = decode_grid(encode_grid(g));
    ASSERT_EQ(back, g) << "seed " << seed;
  }
}

TEST(GridIo, BadMagicIsFormatError) {
  auto bytes = encode_grid(make_jet_flame({4, 4, 4}, 1.0));
  std::memcpy(bytes.data(), "XXXX", 4);
  EXPECT_THROW(decode_grid(bytes), FormatError);
}

TEST(GridIo, PayloadDimsMismatchIsFormatError) {
  VoxelGrid g(GridGeometry::centered({2, 2, 2}, 1.0));
  auto bytes = encode_grid(g);
  bytes.resize(bytes.size() - 4);  // 7 floats for 2x2x2
  try {
    decode_grid(bytes);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_GT(e.offset(), 0u);
  }
}

TEST(GridIo, TruncatedHeaderIsFormatError) {
  auto bytes = encode_grid(make_jet_flame({4, 4, 4}, 1.0));
  bytes.resize(10);
  EXPECT_THROW(decode_grid(bytes), FormatError);
}

TEST(GridIo, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "wernet_grid_io_test.vxg";
  const VoxelGrid g = make_turbulent_flame({8, 16, 8}, 0.5, 5);
  save_grid(g, path);
  EXPECT_EQ(load_grid(path), g);
  std::filesystem::remove(path);
  EXPECT_THROW(load_grid(path), Error);
}
