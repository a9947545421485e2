#include "wernet/traversal.hpp"

namespace wernet {

std::optional<Chord> clip_to_grid(const Ray& ray, const GridGeometry& grid) {
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
  const Vec3 lo = grid.origin;
  const Vec3 hi = grid.max_corner();
  for (int a = 0; a < 3; ++a) {
    const double o = ray.origin[a];
    const double d = ray.direction[a];
    if (d == 0.0) {
      if (o < lo[a] || o > hi[a]) return std::nullopt;
      continue;
    }
    double ta = (lo[a] - o) / d;
    double tb = (hi[a] - o) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (!(t1 - t0 > 1e-12)) return std::nullopt;
  return Chord{t0, t1};
}

ImpactSequence trace_impacting_voxels(const Ray& ray, const GridGeometry& grid, PixelId pixel) {
  ImpactSequence seq;
  seq.pixel = pixel;
  Vec3 entry;
  const auto start = clip_to_grid(ray, grid);
  if (!start) return seq;
  entry = ray.origin + ray.direction * start->t_enter;
  walk_voxels(ray, grid, [&](const Index3& voxel, double s0, double s1) {
    seq.hits.push_back({voxel, entry + ray.direction * (0.5 * (s0 + s1)), s1 - s0});
  });
  return seq;
}

}  // namespace wernet
