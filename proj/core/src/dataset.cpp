#include "wernet/dataset.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

#include "binary_io.hpp"
#include "wernet/errors.hpp"
#include "wernet/parallel.hpp"

namespace wernet {

namespace {

double affine_to_unit(double x, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  return std::clamp(2.0 * (x - lo) / (hi - lo) - 1.0, -1.0, 1.0);
}

}  // namespace

FeatureBlock normalize_features(const ImpactSequence& seq, const GridGeometry& grid) {
  FeatureBlock block;
  block.n = static_cast<int>(seq.size());
  block.values.assign(static_cast<std::size_t>(kFeatureRows) * block.n, 0.0);
  const Vec3 lo = grid.origin;
  const Vec3 hi = grid.max_corner();
  for (int c = 0; c < block.n; ++c) {
    const Hit& h = seq.hits[static_cast<std::size_t>(c)];
    for (int a = 0; a < 3; ++a) {
      block.values[static_cast<std::size_t>(a) * block.n + c] = affine_to_unit(h.voxel[a], 0.0, grid.dims[a] - 1.0);
      block.values[static_cast<std::size_t>(3 + a) * block.n + c] = affine_to_unit(h.seg_point[a], lo[a], hi[a]);
    }
  }
  return block;
}

PaddedInput pad_sequence(const FeatureBlock& features, std::span<const std::uint32_t> indices, int capacity,
                         double target) {
  if (features.n > capacity) {
    throw CapacityError("sequence length " + std::to_string(features.n) + " exceeds capacity " +
                        std::to_string(capacity));
  }
  if (indices.size() != static_cast<std::size_t>(features.n)) {
    throw ShapeError("index count does not match feature length");
  }
  PaddedInput out;
  out.capacity = capacity;
  out.length = features.n;
  out.target = target;
  out.features.assign(static_cast<std::size_t>(kFeatureRows) * capacity, 0.0);
  out.indices.assign(static_cast<std::size_t>(capacity), kPaddingIndex);
  for (int r = 0; r < kFeatureRows; ++r) {
    for (int c = 0; c < features.n; ++c) {
      out.features[static_cast<std::size_t>(r) * capacity + c] = features.at(r, c);
    }
  }
  std::copy(indices.begin(), indices.end(), out.indices.begin());
  return out;
}

PaddedInput RayDataset::padded(std::size_t ray) const {
  const int n = length(ray);
  FeatureBlock block;
  block.n = n;
  const auto f = features(ray);
  block.values.assign(f.begin(), f.end());
  PaddedInput out = pad_sequence(block, indices(ray), capacity_, targets_[ray]);
  out.pixel = pixels_[ray];
  return out;
}

void RayDataset::append(const FeatureBlock& features, std::span<const std::uint32_t> indices, double target,
                        PixelId pixel) {
  if (indices.size() != static_cast<std::size_t>(features.n)) {
    throw ShapeError("index count does not match feature length");
  }
  indices_.insert(indices_.end(), indices.begin(), indices.end());
  for (double v : features.values) features_.push_back(static_cast<float>(v));
  offsets_.push_back(indices_.size());
  targets_.push_back(target);
  pixels_.push_back(pixel);
  capacity_ = std::max(capacity_, features.n);
}

void RayDataset::shuffle(std::uint64_t seed) {
  seed_ = seed;
  std::vector<std::size_t> order(size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  RayDataset out(grid_);
  out.capacity_ = capacity_;
  out.views_ = views_;
  out.seed_ = seed;
  out.indices_.reserve(indices_.size());
  out.features_.reserve(features_.size());
  for (std::size_t ray : order) {
    const auto idx = indices(ray);
    const auto f = features(ray);
    out.indices_.insert(out.indices_.end(), idx.begin(), idx.end());
    out.features_.insert(out.features_.end(), f.begin(), f.end());
    out.offsets_.push_back(out.indices_.size());
    out.targets_.push_back(targets_[ray]);
    out.pixels_.push_back(pixels_[ray]);
  }
  *this = std::move(out);
}

void RayDataset::set_capacity(int capacity) {
  for (std::size_t r = 0; r < size(); ++r) {
    if (length(r) > capacity) throw CapacityError("capacity smaller than the longest ray");
  }
  capacity_ = capacity;
}

RayDataset build_dataset(const GridGeometry& grid, const std::vector<CameraPose>& layout,
                         const std::vector<Image>& images, const DatasetOptions& options) {
  grid.validate();
  if (images.size() != layout.size()) {
    throw ParameterError("got " + std::to_string(images.size()) + " images for " + std::to_string(layout.size()) +
                         " poses");
  }
  for (std::size_t v = 0; v < layout.size(); ++v) {
    if (images[v].rows != layout[v].rows || images[v].cols != layout[v].cols ||
        images[v].pixels.size() != static_cast<std::size_t>(layout[v].rows) * layout[v].cols) {
      throw ParameterError("image " + std::to_string(v) + " does not match its pose's detector size");
    }
  }

  RayDataset dataset(grid);
  for (std::size_t v = 0; v < layout.size(); ++v) {
    const CameraPose& pose = layout[v];
    const Image& image = images[v];
    const std::size_t pixels = static_cast<std::size_t>(pose.rows) * pose.cols;

    // Trace in parallel into per-pixel slots, then append in (row, col) order.
    std::vector<ImpactSequence> traced(pixels);
    parallel_for(pixels, options.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t p = begin; p < end; ++p) {
        const int row = static_cast<int>(p / pose.cols);
        const int col = static_cast<int>(p % pose.cols);
        if (!options.include_zero_pixels && image.pixels[p] == 0.0) continue;
        traced[p] = trace_impacting_voxels(pixel_ray(pose, row, col), grid, {static_cast<int>(v), row, col});
      }
    });

    std::size_t kept = 0;
    std::vector<std::uint32_t> idx;
    for (std::size_t p = 0; p < pixels; ++p) {
      const ImpactSequence& seq = traced[p];
      if (seq.empty()) continue;
      idx.clear();
      for (const Hit& h : seq.hits) idx.push_back(static_cast<std::uint32_t>(grid.flat_index(h.voxel)));
      dataset.append(normalize_features(seq, grid), idx, image.pixels[p], seq.pixel);
      ++kept;
    }
    dataset.add_view({image.view_id, pose, kept});
  }
  dataset.shuffle(options.seed);
  return dataset;
}

void save_dataset(const RayDataset& dataset, const std::filesystem::path& path) {
  const auto& g = dataset.grid();
  detail::ByteWriter w;
  w.magic("RDS1");
  w.json_header({{"N", dataset.capacity()},
                 {"count", dataset.size()},
                 {"grid_dims", {g.dims.nx, g.dims.ny, g.dims.nz}},
                 {"voxel_size_mm", g.voxel_size},
                 {"origin_mm", {g.origin.x, g.origin.y, g.origin.z}},
                 {"seed", dataset.seed()}});
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    w.scalar<std::uint32_t>(static_cast<std::uint32_t>(dataset.length(r)));
    for (auto i : dataset.indices(r)) w.scalar<std::uint32_t>(i);
    for (float f : dataset.features(r)) w.scalar<float>(f);
    w.scalar<double>(dataset.target(r));
  }
  detail::write_file(path, w.bytes());
}

RayDataset load_dataset(const std::filesystem::path& path) {
  detail::ByteReader r(detail::read_file(path));
  r.expect_magic("RDS1");
  const auto at = r.offset();
  const auto header = r.json_header();
  const auto capacity = detail::header_field<int>(header, "N", at);
  const auto count = detail::header_field<std::size_t>(header, "count", at);
  const auto dims = detail::header_field<std::vector<int>>(header, "grid_dims", at);
  const auto voxel = detail::header_field<double>(header, "voxel_size_mm", at);
  const auto origin = detail::header_field<std::vector<double>>(header, "origin_mm", at);
  if (dims.size() != 3 || origin.size() != 3) throw FormatError("grid_dims/origin must have 3 entries", at);
  GridGeometry geom{{dims[0], dims[1], dims[2]}, voxel, {origin[0], origin[1], origin[2]}};

  RayDataset ds(geom);
  std::vector<std::uint32_t> idx;
  for (std::size_t ray = 0; ray < count; ++ray) {
    const auto n = r.scalar<std::uint32_t>();
    if (n > static_cast<std::uint32_t>(capacity)) throw FormatError("ray length exceeds N", r.offset());
    FeatureBlock block;
    block.n = static_cast<int>(n);
    idx.resize(n);
    for (auto& i : idx) {
      i = r.scalar<std::uint32_t>();
      if (i >= geom.dims.count()) throw FormatError("voxel index out of range", r.offset());
    }
    block.values.resize(static_cast<std::size_t>(kFeatureRows) * n);
    for (auto& f : block.values) f = r.f32();
    const double target = r.scalar<double>();
    ds.append(block, idx, target, {});
  }
  r.expect_end();
  ds.set_capacity(capacity);
  ds.set_seed(header.value("seed", std::uint64_t{0}));
  return ds;
}

}  // namespace wernet
