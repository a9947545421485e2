#include "wernet/grid_io.hpp"

#include <string>

#include "binary_io.hpp"

namespace wernet {

std::vector<unsigned char> encode_grid(const VoxelGrid& grid) {
  const auto& g = grid.geometry();
  detail::ByteWriter w;
  w.magic("VXG1");
  w.json_header({{"dims", {g.dims.nx, g.dims.ny, g.dims.nz}},
                 {"voxel_size_mm", g.voxel_size},
                 {"origin_mm", {g.origin.x, g.origin.y, g.origin.z}}});
  for (double v : grid.values()) w.f32(v);
  return w.bytes();
}

VoxelGrid decode_grid(std::vector<unsigned char> bytes) {
  detail::ByteReader r(std::move(bytes));
  r.expect_magic("VXG1");
  const auto header_at = r.offset();
  const auto header = r.json_header();
  const auto dims = detail::header_field<std::vector<int>>(header, "dims", header_at);
  const auto origin = detail::header_field<std::vector<double>>(header, "origin_mm", header_at);
  const auto voxel_size = detail::header_field<double>(header, "voxel_size_mm", header_at);
  if (dims.size() != 3 || origin.size() != 3) throw FormatError("dims/origin must have 3 entries", header_at);

  GridGeometry geom{{dims[0], dims[1], dims[2]}, voxel_size, {origin[0], origin[1], origin[2]}};
  try {
    geom.validate();
  } catch (const ParameterError& e) {
    throw FormatError(e.what(), header_at);
  }
  const std::size_t count = geom.dims.count();
  if (r.remaining() != count * sizeof(float)) {
    throw FormatError("payload holds " + std::to_string(r.remaining()) + " bytes but dims require " +
                          std::to_string(count * sizeof(float)),
                      r.offset());
  }
  std::vector<double> values(count);
  for (auto& v : values) v = r.f32();
  return VoxelGrid(geom, std::move(values));
}

void save_grid(const VoxelGrid& grid, const std::filesystem::path& path) {
  detail::write_file(path, encode_grid(grid));
}

VoxelGrid load_grid(const std::filesystem::path& path) { return decode_grid(detail::read_file(path)); }

}  // namespace wernet
