#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "wernet/camera.hpp"

namespace wernet {

/// One projection. Pixels are row-major, in voxel-intensity x millimeter units.
struct Image {
  int view_id = 0;
  int rows = 0;
  int cols = 0;
  std::vector<double> pixels;
  std::optional<CameraPose> pose;

  Image() = default;
  Image(int view, int rows_, int cols_) : view_id(view), rows(rows_), cols(cols_), pixels(std::size_t(rows_) * cols_) {}

  double& at(int r, int c) { return pixels[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * cols + c]; }
  double max_value() const;

  bool operator==(const Image&) const = default;
};

// IMG1 layout: "IMG1", u32 header length, JSON {"view_id","rows","cols","pose"},
// then rows*cols little-endian float32, row-major.
std::vector<unsigned char> encode_image(const Image& image);
Image decode_image(std::vector<unsigned char> bytes);
void save_image(const Image& image, const std::filesystem::path& path);
Image load_image(const std::filesystem::path& path);

/// Binary 16-bit PGM (P5, maxval 65535), scaled so the largest value maps to 65535.
/// Negative values are clamped to 0.
void export_pgm(const std::filesystem::path& path, int rows, int cols, const std::vector<double>& values);
inline void export_pgm(const std::filesystem::path& path, const Image& image) {
  export_pgm(path, image.rows, image.cols, image.pixels);
}
/// Reads back a 16-bit PGM written by export_pgm (gray levels, row-major).
std::vector<int> read_pgm16(const std::filesystem::path& path, int& rows, int& cols);

}  // namespace wernet
