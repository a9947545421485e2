#include "wernet/art.hpp"

#include <algorithm>
#include <chrono>
#include <random>
#include <string>

#include "wernet/errors.hpp"
#include "wernet/metrics.hpp"

namespace wernet {

void ArtConfig::validate() const {
  if (!(relaxation > 0.0 && relaxation < 2.0)) throw ParameterError("ART relaxation must lie in (0, 2)");
  if (sweeps < 1) throw ParameterError("ART needs at least one sweep");
}

namespace {

struct Weight {
  std::size_t voxel;
  double length;
};

void collect_weights(const Ray& ray, const GridGeometry& geom, std::vector<Weight>& out) {
  out.clear();
  walk_voxels(ray, geom, [&](const Index3& v, double s0, double s1) { out.push_back({geom.flat_index(v), s1 - s0}); });
}

double weighted_sum(const std::vector<Weight>& weights, const std::vector<double>& values) {
  double acc = 0.0;
  for (const auto& w : weights) acc += w.length * values[w.voxel];
  return acc;
}

}  // namespace

ArtResult art_reconstruct(const std::vector<Image>& images, const std::vector<CameraPose>& layout,
                          const GridGeometry& grid, const ArtConfig& config, const VoxelGrid* ground_truth,
                          const ArtUpdateHook& hook) {
  config.validate();
  grid.validate();
  if (images.size() != layout.size()) throw ParameterError("image count does not match layout");
  for (std::size_t v = 0; v < layout.size(); ++v) {
    if (images[v].rows != layout[v].rows || images[v].cols != layout[v].cols) {
      throw ParameterError("image " + std::to_string(v) + " does not match its pose");
    }
  }
  if (ground_truth && !(ground_truth->dims() == grid.dims)) {
    throw ShapeError("ground truth dims differ from the reconstruction grid");
  }

  // Only the pixel ids of intersecting rays are kept; weights are re-traced per update.
  std::vector<PixelId> rays;
  for (std::size_t v = 0; v < layout.size(); ++v) {
    for (int r = 0; r < layout[v].rows; ++r) {
      for (int c = 0; c < layout[v].cols; ++c) {
        if (clip_to_grid(pixel_ray(layout[v], r, c), grid)) rays.push_back({static_cast<int>(v), r, c});
      }
    }
  }
  if (rays.empty()) throw ReconstructionError("no ray intersects the reconstruction grid");

  std::vector<double> values(grid.dims.count(), 0.0);
  std::vector<Weight> weights;
  std::mt19937_64 rng(config.seed);
  ArtResult result;
  const auto t_start = std::chrono::steady_clock::now();

  for (int sweep = 0; sweep < config.sweeps; ++sweep) {
    if (config.order == RayOrder::shuffled) std::shuffle(rays.begin(), rays.end(), rng);
    for (const PixelId& id : rays) {
      collect_weights(pixel_ray(layout[id.view], id.row, id.col), grid, weights);
      double norm_sq = 0.0;
      for (const auto& w : weights) norm_sq += w.length * w.length;
      if (!(norm_sq > 0.0)) continue;
      const double measured = images[id.view].at(id.row, id.col);
      const double factor = config.relaxation * (measured - weighted_sum(weights, values)) / norm_sq;
      for (const auto& w : weights) {
        double& v = values[w.voxel];
        v += factor * w.length;
        if (config.nonneg_clamp && v < 0.0) v = 0.0;
      }
      if (hook) hook(id, measured - weighted_sum(weights, values));
    }

    ArtSweepRecord record;
    record.sweep = sweep;
    for (const PixelId& id : rays) {
      collect_weights(pixel_ray(layout[id.view], id.row, id.col), grid, weights);
      const double r = images[id.view].at(id.row, id.col) - weighted_sum(weights, values);
      record.residual_sum_squares += r * r;
    }
    if (ground_truth) {
      try {
        record.cosine_similarity = cosine_similarity(values, ground_truth->values());
      } catch (const MetricError&) {
        record.cosine_similarity = 0.0;
      }
    }
    record.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start).count();
    result.history.push_back(record);
  }

  result.grid = VoxelGrid(grid, std::move(values));
  return result;
}

}  // namespace wernet
