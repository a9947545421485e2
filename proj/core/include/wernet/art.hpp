#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "wernet/camera.hpp"
#include "wernet/image.hpp"
#include "wernet/traversal.hpp"
#include "wernet/voxel_grid.hpp"

namespace wernet {

enum class RayOrder { sequential, shuffled };

struct ArtConfig {
  double relaxation = 0.2;  // lambda, in (0, 2)
  int sweeps = 50;
  bool nonneg_clamp = true;
  RayOrder order = RayOrder::sequential;
  std::uint64_t seed = 0;  // used by RayOrder::shuffled

  void validate() const;
};

struct ArtSweepRecord {
  int sweep = 0;
  double residual_sum_squares = 0.0;  // over all rays, after the sweep
  std::optional<double> cosine_similarity;
  double wall_ms = 0.0;
};

struct ArtResult {
  VoxelGrid grid;
  std::vector<ArtSweepRecord> history;
};

/// Called after each ray update with the ray's residual p - sum(w v) recomputed on the new voxels.
using ArtUpdateHook = std::function<void(const PixelId& pixel, double residual_after)>;

/// Row-action Kaczmarz from an all-zero start:
///   v_j += lambda * (p_i - sum_k w_ik v_k) * w_ij / sum_k w_ik^2
/// with w the segment lengths of ray i, traced on the fly. Rays that miss the grid are skipped.
/// Throws ReconstructionError when no ray intersects the grid.
ArtResult art_reconstruct(const std::vector<Image>& images, const std::vector<CameraPose>& layout,
                          const GridGeometry& grid, const ArtConfig& config,
                          const VoxelGrid* ground_truth = nullptr, const ArtUpdateHook& hook = {});

}  // namespace wernet
