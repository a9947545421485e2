#include "wernet/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "binary_io.hpp"

namespace wernet {

double Image::max_value() const {
  if (pixels.empty()) return 0.0;
  return *std::max_element(pixels.begin(), pixels.end());
}

std::vector<unsigned char> encode_image(const Image& image) {
  detail::ByteWriter w;
  w.magic("IMG1");
  nlohmann::json header = {{"view_id", image.view_id}, {"rows", image.rows}, {"cols", image.cols}};
  header["pose"] = image.pose ? nlohmann::json(*image.pose) : nlohmann::json(nullptr);
  w.json_header(header);
  for (double v : image.pixels) w.f32(v);
  return w.bytes();
}

Image decode_image(std::vector<unsigned char> bytes) {
  detail::ByteReader r(std::move(bytes));
  r.expect_magic("IMG1");
  const auto header_at = r.offset();
  const auto header = r.json_header();
  Image img;
  img.view_id = detail::header_field<int>(header, "view_id", header_at);
  img.rows = detail::header_field<int>(header, "rows", header_at);
  img.cols = detail::header_field<int>(header, "cols", header_at);
  if (img.rows < 1 || img.cols < 1) throw FormatError("image rows/cols must be >= 1", header_at);
  if (header.contains("pose") && !header["pose"].is_null()) {
    try {
      img.pose = header["pose"].get<CameraPose>();
    } catch (const std::exception& e) {
      throw FormatError(std::string("invalid pose: ") + e.what(), header_at);
    }
  }
  const std::size_t count = static_cast<std::size_t>(img.rows) * img.cols;
  if (r.remaining() != count * sizeof(float)) {
    throw FormatError("payload holds " + std::to_string(r.remaining()) + " bytes but rows*cols require " +
                          std::to_string(count * sizeof(float)),
                      r.offset());
  }
  img.pixels.resize(count);
  for (auto& p : img.pixels) p = r.f32();
  return img;
}

void save_image(const Image& image, const std::filesystem::path& path) {
  detail::write_file(path, encode_image(image));
}

Image load_image(const std::filesystem::path& path) { return decode_image(detail::read_file(path)); }

void export_pgm(const std::filesystem::path& path, int rows, int cols, const std::vector<double>& values) {
  if (rows < 1 || cols < 1 || values.size() != static_cast<std::size_t>(rows) * cols) {
    throw ParameterError("PGM export needs rows*cols values");
  }
  const double peak = *std::max_element(values.begin(), values.end());
  std::ostringstream out;
  out << "P5\n" << cols << " " << rows << "\n65535\n";
  std::string data = out.str();
  for (double v : values) {
    const double scaled = peak > 0.0 ? std::clamp(v / peak, 0.0, 1.0) * 65535.0 : 0.0;
    const auto level = static_cast<unsigned>(std::lround(scaled));
    data.push_back(static_cast<char>((level >> 8) & 0xFF));
    data.push_back(static_cast<char>(level & 0xFF));
  }
  detail::write_file(path, std::vector<unsigned char>(data.begin(), data.end()));
}

std::vector<int> read_pgm16(const std::filesystem::path& path, int& rows, int& cols) {
  const auto bytes = detail::read_file(path);
  std::string text(bytes.begin(), bytes.end());
  std::istringstream in(text);
  std::string magic;
  int maxval = 0;
  in >> magic >> cols >> rows >> maxval;
  if (magic != "P5" || maxval != 65535) throw FormatError("not a 16-bit binary PGM", 0);
  in.get();
  const auto start = static_cast<std::size_t>(in.tellg());
  const std::size_t count = static_cast<std::size_t>(rows) * cols;
  if (bytes.size() - start != 2 * count) throw FormatError("PGM payload size mismatch", start);
  std::vector<int> levels(count);
  for (std::size_t i = 0; i < count; ++i) levels[i] = (bytes[start + 2 * i] << 8) | bytes[start + 2 * i + 1];
  return levels;
}

}  // namespace wernet
