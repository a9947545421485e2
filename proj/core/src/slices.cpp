#include "wernet/slices.hpp"

#include <cmath>

#include "wernet/errors.hpp"
#include "wernet/image.hpp"

namespace wernet {

Slice extract_slice(const VoxelGrid& grid, int axis, int position) {
  const Dims& d = grid.dims();
  if (axis < 0 || axis > 2) throw ParameterError("slice axis must be 0, 1 or 2");
  if (position < 0 || position >= d[axis]) {
    throw ParameterError("slice position " + std::to_string(position) + " outside [0, " + std::to_string(d[axis]) +
                         ")");
  }
  Slice s;
  switch (axis) {
    case 0:
      s.rows = d.ny;
      s.cols = d.nz;
      for (int r = 0; r < s.rows; ++r) {
        for (int c = 0; c < s.cols; ++c) s.values.push_back(grid.at(position, d.ny - 1 - r, c));
      }
      break;
    case 1:
      s.rows = d.nz;
      s.cols = d.nx;
      for (int r = 0; r < s.rows; ++r) {
        for (int c = 0; c < s.cols; ++c) s.values.push_back(grid.at(c, position, r));
      }
      break;
    default:
      s.rows = d.ny;
      s.cols = d.nx;
      for (int r = 0; r < s.rows; ++r) {
        for (int c = 0; c < s.cols; ++c) s.values.push_back(grid.at(c, d.ny - 1 - r, position));
      }
      break;
  }
  return s;
}

std::vector<std::filesystem::path> export_cross_sections(const VoxelGrid& grid, int axis,
                                                         const std::vector<int>& positions,
                                                         const std::filesystem::path& out_dir,
                                                         const VoxelGrid* reference, const std::string& prefix) {
  if (reference && reference->dims() != grid.dims()) throw ShapeError("reference grid dims differ");
  for (int p : positions) extract_slice(grid, axis, p);  // validate everything before writing
  std::filesystem::create_directories(out_dir);
  const char axis_name = "xyz"[axis];
  std::vector<std::filesystem::path> written;
  for (int p : positions) {
    const Slice s = extract_slice(grid, axis, p);
    const std::string stem = prefix + "_" + axis_name + "_" + std::to_string(p);
    written.push_back(out_dir / (stem + ".pgm"));
    export_pgm(written.back(), s.rows, s.cols, s.values);
    if (reference) {
      Slice diff = extract_slice(*reference, axis, p);
      for (std::size_t i = 0; i < diff.values.size(); ++i) diff.values[i] = std::abs(s.values[i] - diff.values[i]);
      written.push_back(out_dir / (stem + "_diff.pgm"));
      export_pgm(written.back(), diff.rows, diff.cols, diff.values);
    }
  }
  return written;
}

int parse_axis(const std::string& text) {
  if (text == "x" || text == "0") return 0;
  if (text == "y" || text == "1") return 1;
  if (text == "z" || text == "2") return 2;
  throw ParameterError("unknown axis \"" + text + "\" (use x, y or z)");
}

}  // namespace wernet
