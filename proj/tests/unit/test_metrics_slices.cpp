#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "wernet/errors.hpp"
#include "wernet/image.hpp"
#include "wernet/metrics.hpp"
#include "wernet/phantoms.hpp"
#include "wernet/slices.hpp"

using namespace wernet;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(CosineSimilarity, Examples) {
  const std::vector<double> a{1.0, 0.0, 0.0, 0.0};
  const std::vector<double> b{1.0, 1.0, 0.0, 0.0};
  const std::vector<double> c{0.0, 0.0, 2.0, 3.0};
  EXPECT_NEAR(cosine_similarity(b, b), 1.0, 1e-15);
  EXPECT_EQ(cosine_similarity(a, c), 0.0);
  EXPECT_NEAR(cosine_similarity(a, b), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(cosine_similarity(a, b), 0.70711, 1e-5);
  const double s = cosine_similarity(a, b);
  EXPECT_EQ(cosine_distance(s) + s, 1.0);
}

TEST(CosineSimilarity, Errors) {
  const std::vector<double> z(4, 0.0), a{1, 2, 3, 4};
  EXPECT_THROW(cosine_similarity(z, a), MetricError);
  EXPECT_THROW(cosine_similarity(a, z), MetricError);
  EXPECT_THROW(cosine_similarity(std::vector<double>{1.0}, a), ShapeError);
  const VoxelGrid g1 = make_jet_flame({4, 8, 4}, 1.0);
  const VoxelGrid g2 = make_jet_flame({4, 9, 4}, 1.0);
  EXPECT_THROW(cosine_similarity(g1, g2), ShapeError);
  EXPECT_NEAR(cosine_similarity(g1, g1), 1.0, 1e-15);
}

TEST(Slices, LayoutOfEachAxis) {
  VoxelGrid g(GridGeometry::centered({2, 3, 4}, 1.0));
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<double>(i);
  const Slice z = extract_slice(g, 2, 1);
  EXPECT_EQ(z.rows, 3);
  EXPECT_EQ(z.cols, 2);
  EXPECT_EQ(z.values[0], g.at(0, 2, 1));  // top row is the largest j
  const Slice x = extract_slice(g, 0, 1);
  EXPECT_EQ(x.rows, 3);
  EXPECT_EQ(x.cols, 4);
  EXPECT_EQ(x.values[1], g.at(1, 2, 1));
  const Slice y = extract_slice(g, 1, 2);
  EXPECT_EQ(y.rows, 4);
  EXPECT_EQ(y.cols, 2);
  EXPECT_EQ(y.values[2 * 2 + 1], g.at(1, 2, 2));
  EXPECT_THROW(extract_slice(g, 2, 4), ParameterError);
  EXPECT_THROW(extract_slice(g, 3, 0), ParameterError);
}

TEST(Slices, ZeroGridAndSelfDifference) {
  const auto dir = fresh_dir("wernet_slices_zero");
  const VoxelGrid zero(GridGeometry::centered({4, 6, 4}, 1.0));
  auto paths = export_cross_sections(zero, 2, {1}, dir);
  ASSERT_EQ(paths.size(), 1u);
  int rows = 0, cols = 0;
  for (int v : read_pgm16(paths[0], rows, cols)) EXPECT_EQ(v, 0);

  const VoxelGrid jet = make_jet_flame({8, 16, 8}, 0.5);
  paths = export_cross_sections(jet, 1, {4, 8}, dir, &jet, "jet");
  ASSERT_EQ(paths.size(), 4u);
  EXPECT_EQ(paths[1].filename(), "jet_y_4_diff.pgm");
  for (int v : read_pgm16(paths[1], rows, cols)) EXPECT_EQ(v, 0);
  std::filesystem::remove_all(dir);
}

TEST(Slices, JetMidSliceIsSymmetric) {
  const auto dir = fresh_dir("wernet_slices_jet");
  const VoxelGrid jet = make_jet_flame({30, 140, 30}, 0.5);
  const auto paths = export_cross_sections(jet, 2, {15}, dir);
  int rows = 0, cols = 0;
  const auto gray = read_pgm16(paths[0], rows, cols);
  ASSERT_EQ(cols, 30);
  int worst = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols / 2; ++c) worst = std::max(worst, std::abs(gray[r * cols + c] - gray[r * cols + cols - 1 - c]));
  EXPECT_LE(worst, 1);
  std::filesystem::remove_all(dir);
}

TEST(Slices, OutOfRangePositionWritesNothing) {
  const auto dir = fresh_dir("wernet_slices_bad");
  const VoxelGrid jet = make_jet_flame({8, 16, 8}, 0.5);
  EXPECT_THROW(export_cross_sections(jet, 0, {2, 8}, dir), ParameterError);
  EXPECT_TRUE(std::filesystem::is_empty(dir));
  EXPECT_EQ(parse_axis("y"), 1);
  EXPECT_EQ(parse_axis("2"), 2);
  EXPECT_THROW(parse_axis("w"), ParameterError);
  std::filesystem::remove_all(dir);
}
