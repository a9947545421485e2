#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace wernet {

inline constexpr double kGradNormEpsilon = 1e-12;

/// v_j = voxels[indices_j] for j < n, 0 for n <= j < N. Throws IndexError for an out-of-range index
/// among the first n.
void voxel_pool(std::span<const double> voxels, std::span<const std::uint32_t> indices, int n,
                std::span<double> out);
std::vector<double> voxel_pool(std::span<const double> voxels, std::span<const std::uint32_t> indices, int n,
                               int capacity);

/// Sum of w_i * v_i in increasing index order. Throws ShapeError on length mismatch.
double predict_pixel(std::span<const double> w, std::span<const double> v);

/// Backward of p = w . v for upstream g.
/// Enabled:  g_v = g * w / max(|w|, eps), g_w = g * v.  Disabled: g_v = g * w, g_w = g * v.
void gradnorm_backward(double g, std::span<const double> w, std::span<const double> v, bool enabled,
                       std::span<double> grad_v, std::span<double> grad_w);

struct RayGradients {
  std::vector<double> grad_v;
  std::vector<double> grad_w;
};
RayGradients gradnorm_backward(double g, std::span<const double> w, std::span<const double> v, bool enabled);

}  // namespace wernet
