#include "wernet/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "wernet/errors.hpp"

namespace wernet {

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("cosine similarity needs equal-length vectors");
  double ab = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (!(aa > 0.0) || !(bb > 0.0)) throw MetricError("cosine similarity is undefined for a zero vector");
  return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

double cosine_similarity(const VoxelGrid& a, const VoxelGrid& b) {
  if (!(a.dims() == b.dims())) throw ShapeError("cosine similarity needs grids of equal dims");
  return cosine_similarity(a.values(), b.values());
}

}  // namespace wernet
