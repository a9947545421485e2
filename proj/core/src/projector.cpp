#include "wernet/projector.hpp"

#include <random>

#include "wernet/errors.hpp"
#include "wernet/parallel.hpp"
#include "wernet/traversal.hpp"

namespace wernet {

Image forward_project(const VoxelGrid& grid, const CameraPose& pose, int view_id, int threads) {
  pose.validate();
  Image image(view_id, pose.rows, pose.cols);
  image.pose = pose;
  const auto& geom = grid.geometry();
  const std::size_t pixels = image.pixels.size();
  parallel_for(pixels, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const Ray ray = pixel_ray(pose, static_cast<int>(p / pose.cols), static_cast<int>(p % pose.cols));
      double sum = 0.0;
      walk_voxels(ray, geom, [&](const Index3& v, double s0, double s1) { sum += (s1 - s0) * grid.at(v[0], v[1], v[2]); });
      image.pixels[p] = sum;
    }
  });
  return image;
}

Image add_noise(const Image& image, double fraction, std::uint64_t seed, bool clamp_nonnegative) {
  if (image.pixels.empty()) throw ParameterError("cannot add noise to an empty image");
  if (!(fraction >= 0.0)) throw ParameterError("noise fraction must be >= 0");
  Image out = image;
  const double sigma = fraction * image.max_value();
  if (sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    for (double& p : out.pixels) p += gauss(rng);
  }
  if (clamp_nonnegative) {
    for (double& p : out.pixels) p = std::max(p, 0.0);
  }
  return out;
}

}  // namespace wernet
