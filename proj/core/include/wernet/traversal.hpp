#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "wernet/camera.hpp"
#include "wernet/voxel_grid.hpp"

namespace wernet {

struct PixelId {
  int view = -1;
  int row = 0;
  int col = 0;
  bool operator==(const PixelId&) const = default;
};

/// One impacting voxel: the ray-voxel intersection segment and its midpoint (the seg point).
struct Hit {
  Index3 voxel{};
  Vec3 seg_point;
  double length = 0.0;  // mm
};

/// Impacting voxels of one ray, ordered by increasing distance along the ray.
struct ImpactSequence {
  PixelId pixel;
  std::vector<Hit> hits;

  std::size_t size() const { return hits.size(); }
  bool empty() const { return hits.empty(); }
};

/// Ray parameters where the ray enters and leaves the grid's bounding box (entry clamped to t >= 0).
struct Chord {
  double t_enter = 0.0;
  double t_exit = 0.0;
  double length() const { return t_exit - t_enter; }
};

/// Slab test. Returns nothing when the ray misses the box or only grazes it.
std::optional<Chord> clip_to_grid(const Ray& ray, const GridGeometry& grid);

/// Incremental axis-stepping walk. Calls visit(Index3 voxel, double s0, double s1) for every voxel
/// crossed with a positive-length segment, where s0 < s1 are distances from the entry point.
/// Axis crossings within 1e-12 of each other are stepped together, so the zero-length voxel
/// between them is never reported. Returns the entry point (or nothing on a miss).
template <typename Visit>
std::optional<Vec3> walk_voxels(const Ray& ray, const GridGeometry& grid, Visit&& visit) {
  constexpr double kTie = 1e-12;
  const auto chord = clip_to_grid(ray, grid);
  if (!chord) return std::nullopt;

  const Vec3 entry = ray.origin + ray.direction * chord->t_enter;
  const double length = chord->length();
  const double vs = grid.voxel_size;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  Index3 idx{};
  int step[3]{};
  for (int a = 0; a < 3; ++a) {
    const int n = grid.dims[a];
    const double q = (entry[a] - grid.origin[a]) / vs;
    int i = static_cast<int>(std::floor(q));
    if (ray.direction[a] < 0.0 && q == std::floor(q)) --i;  // entering through a max-side face
    idx[a] = std::clamp(i, 0, n - 1);
    step[a] = ray.direction[a] > 0.0 ? 1 : (ray.direction[a] < 0.0 ? -1 : 0);
  }

  auto boundary_param = [&](int a) {
    if (step[a] == 0) return kInf;
    const double plane = grid.origin[a] + (idx[a] + (step[a] > 0 ? 1 : 0)) * vs;
    return (plane - entry[a]) / ray.direction[a];
  };
  double next[3] = {boundary_param(0), boundary_param(1), boundary_param(2)};

  double s = 0.0;
  const std::size_t max_steps = static_cast<std::size_t>(grid.dims.nx + grid.dims.ny + grid.dims.nz) + 3;
  for (std::size_t guard = 0; guard < max_steps; ++guard) {
    const double s_next = std::min({next[0], next[1], next[2], length});
    if (s_next > s) visit(static_cast<const Index3&>(idx), s, s_next);
    if (s_next >= length) break;
    bool inside = true;
    for (int a = 0; a < 3; ++a) {
      if (next[a] <= s_next + kTie) {
        idx[a] += step[a];
        if (idx[a] < 0 || idx[a] >= grid.dims[a]) inside = false;
        next[a] = boundary_param(a);
      }
    }
    if (!inside) break;
    s = s_next;
  }
  return entry;
}

/// All voxels the ray crosses with positive length, with seg points and segment lengths.
ImpactSequence trace_impacting_voxels(const Ray& ray, const GridGeometry& grid, PixelId pixel = {});

}  // namespace wernet
