#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <vector>

#include "wernet/camera.hpp"
#include "wernet/image.hpp"
#include "wernet/traversal.hpp"
#include "wernet/voxel_grid.hpp"

namespace wernet {

inline constexpr int kFeatureRows = 6;
/// Voxel index stored in padded positions.
inline constexpr std::uint32_t kPaddingIndex = std::numeric_limits<std::uint32_t>::max();

/// 6 x n row-major block: rows 0-2 hold voxel indices and rows 3-5 seg-point coordinates,
/// each mapped affinely onto [-1, 1].
struct FeatureBlock {
  int n = 0;
  std::vector<double> values;

  double at(int row, int col) const { return values[static_cast<std::size_t>(row) * n + col]; }
};

/// Index i on an axis of size d maps to 2*i/(d-1) - 1 (0 when d == 1); coordinates map from the
/// grid's bounding box onto [-1, 1].
FeatureBlock normalize_features(const ImpactSequence& seq, const GridGeometry& grid);

/// Zero-extended encoder input of fixed capacity N.
struct PaddedInput {
  int capacity = 0;                     // N
  int length = 0;                       // n
  std::vector<double> features;         // 6 x N row-major; columns >= n are zero
  std::vector<std::uint32_t> indices;   // N flat voxel indices; kPaddingIndex beyond n
  double target = 0.0;
  PixelId pixel;

  double feature(int row, int col) const { return features[static_cast<std::size_t>(row) * capacity + col]; }
};

/// Throws CapacityError when features.n > capacity.
PaddedInput pad_sequence(const FeatureBlock& features, std::span<const std::uint32_t> indices, int capacity,
                         double target = 0.0);

struct DatasetOptions {
  bool include_zero_pixels = true;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct ViewProvenance {
  int view_id = 0;
  CameraPose pose;
  std::size_t ray_count = 0;
  bool operator==(const ViewProvenance&) const = default;
};

/// Rays of all views, stored compactly (only the n true columns per ray, features in float32).
/// Rays are assembled in (view, row, col) order and then shuffled with the dataset seed.
class RayDataset {
 public:
  RayDataset() = default;
  explicit RayDataset(const GridGeometry& grid) : grid_(grid) {}

  const GridGeometry& grid() const { return grid_; }
  std::size_t size() const { return targets_.size(); }
  bool empty() const { return targets_.empty(); }
  /// Sequence capacity N: the longest retained ray.
  int capacity() const { return capacity_; }

  int length(std::size_t ray) const { return static_cast<int>(offsets_[ray + 1] - offsets_[ray]); }
  std::span<const std::uint32_t> indices(std::size_t ray) const {
    return {indices_.data() + offsets_[ray], static_cast<std::size_t>(length(ray))};
  }
  /// 6 x n row-major features of one ray.
  std::span<const float> features(std::size_t ray) const {
    return {features_.data() + kFeatureRows * offsets_[ray], static_cast<std::size_t>(kFeatureRows * length(ray))};
  }
  double target(std::size_t ray) const { return targets_[ray]; }
  PixelId pixel(std::size_t ray) const { return pixels_[ray]; }
  PaddedInput padded(std::size_t ray) const;

  const std::vector<ViewProvenance>& views() const { return views_; }
  std::uint64_t seed() const { return seed_; }

  void append(const FeatureBlock& features, std::span<const std::uint32_t> indices, double target, PixelId pixel);
  void add_view(ViewProvenance view) { views_.push_back(std::move(view)); }
  /// Seeded Fisher-Yates reorder of all rays.
  void shuffle(std::uint64_t seed);
  /// Overrides the derived capacity; must be >= the longest ray.
  void set_capacity(int capacity);
  void set_seed(std::uint64_t seed) { seed_ = seed; }

  bool operator==(const RayDataset&) const = default;

 private:
  GridGeometry grid_;
  int capacity_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::uint32_t> indices_;
  std::vector<float> features_;
  std::vector<double> targets_;
  std::vector<PixelId> pixels_;
  std::vector<ViewProvenance> views_;
  std::uint64_t seed_ = 0;
};

/// One entry per pixel whose ray hits the grid (n > 0), target = pixel value.
/// With include_zero_pixels = false, pixels whose value is exactly 0 are dropped too.
RayDataset build_dataset(const GridGeometry& grid, const std::vector<CameraPose>& layout,
                         const std::vector<Image>& images, const DatasetOptions& options = {});

// RDS1 cache: "RDS1", u32 header length, JSON {"N","count","grid_dims","voxel_size_mm","origin_mm"},
// then per ray: u32 n, n x u32 indices, 6n x float32 features (row-major), float64 target.
// Pixel provenance is not persisted.
void save_dataset(const RayDataset& dataset, const std::filesystem::path& path);
RayDataset load_dataset(const std::filesystem::path& path);

}  // namespace wernet
