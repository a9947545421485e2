#include "wernet/ray_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wernet/errors.hpp"

namespace wernet {

void voxel_pool(std::span<const double> voxels, std::span<const std::uint32_t> indices, int n,
                std::span<double> out) {
  if (n < 0 || static_cast<std::size_t>(n) > indices.size() || static_cast<std::size_t>(n) > out.size()) {
    throw ShapeError("voxel_pool: n exceeds the index or output length");
  }
  for (int j = 0; j < n; ++j) {
    const std::uint32_t idx = indices[static_cast<std::size_t>(j)];
    if (idx >= voxels.size()) {
      throw IndexError("voxel index " + std::to_string(idx) + " out of range for " + std::to_string(voxels.size()) +
                       " voxels");
    }
    out[static_cast<std::size_t>(j)] = voxels[idx];
  }
  std::fill(out.begin() + n, out.end(), 0.0);
}

std::vector<double> voxel_pool(std::span<const double> voxels, std::span<const std::uint32_t> indices, int n,
                               int capacity) {
  if (capacity < n) throw CapacityError("sequence length exceeds capacity");
  std::vector<double> out(static_cast<std::size_t>(capacity));
  voxel_pool(voxels, indices, n, out);
  return out;
}

double predict_pixel(std::span<const double> w, std::span<const double> v) {
  if (w.size() != v.size()) throw ShapeError("predict_pixel: weight and value lengths differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) sum += w[i] * v[i];
  return sum;
}

void gradnorm_backward(double g, std::span<const double> w, std::span<const double> v, bool enabled,
                       std::span<double> grad_v, std::span<double> grad_w) {
  if (w.size() != v.size() || grad_v.size() != w.size() || grad_w.size() != w.size()) {
    throw ShapeError("gradnorm_backward: length mismatch");
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    grad_v[i] = g * w[i];
    grad_w[i] = g * v[i];
  }
  if (enabled) {
    double sq = 0.0;
    for (double x : w) sq += x * x;
    const double norm = std::max(std::sqrt(sq), kGradNormEpsilon);
    for (double& gv : grad_v) gv /= norm;
  }
}

RayGradients gradnorm_backward(double g, std::span<const double> w, std::span<const double> v, bool enabled) {
  RayGradients out{std::vector<double>(w.size()), std::vector<double>(w.size())};
  gradnorm_backward(g, w, v, enabled, out.grad_v, out.grad_w);
  return out;
}

}  // namespace wernet
