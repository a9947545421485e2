#pragma once

// Little-endian record helpers shared by the VXG1 / IMG1 / WEN1 / RDS1 formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "wernet/errors.hpp"

namespace wernet::detail {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T to_little(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    std::memcpy(&value, bytes, sizeof(T));
  }
  return value;
}

class ByteWriter {
 public:
  void magic(std::string_view m) { bytes_.insert(bytes_.end(), m.begin(), m.end()); }

  template <typename T>
  void scalar(T value) {
    value = to_little(value);
    const auto* p = reinterpret_cast<const unsigned char*>(&value);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }

  /// 4-byte length prefix followed by the compact JSON text.
  void json_header(const nlohmann::json& header) {
    const std::string text = header.dump();
    scalar<std::uint32_t>(static_cast<std::uint32_t>(text.size()));
    bytes_.insert(bytes_.end(), text.begin(), text.end());
  }

  void f32(double value) { scalar<float>(static_cast<float>(value)); }

  const std::vector<unsigned char>& bytes() const { return bytes_; }

 private:
  std::vector<unsigned char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<unsigned char> bytes) : bytes_(std::move(bytes)) {}

  std::uint64_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  void expect_magic(std::string_view m) {
    require(m.size(), "file too short for magic");
    if (std::memcmp(bytes_.data() + pos_, m.data(), m.size()) != 0) {
      throw FormatError("bad magic, expected \"" + std::string(m) + "\"", pos_);
    }
    pos_ += m.size();
  }

  template <typename T>
  T scalar() {
    require(sizeof(T), "truncated payload");
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return to_little(value);
  }

  nlohmann::json json_header() {
    const auto len = scalar<std::uint32_t>();
    require(len, "truncated header");
    const auto start = pos_;
    nlohmann::json header;
    try {
      header = nlohmann::json::parse(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                     bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + len));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("malformed JSON header: ") + e.what(), start);
    }
    if (!header.is_object()) throw FormatError("JSON header is not an object", start);
    pos_ += len;
    return header;
  }

  double f32() { return static_cast<double>(scalar<float>()); }

  void require(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) throw FormatError(what, pos_);
  }

  void expect_end() const {
    if (pos_ != bytes_.size()) throw FormatError("trailing bytes after payload", pos_);
  }

 private:
  std::vector<unsigned char> bytes_;
  std::size_t pos_ = 0;
};

void write_file(const std::filesystem::path& path, const std::vector<unsigned char>& bytes);
std::vector<unsigned char> read_file(const std::filesystem::path& path);

/// Reads a typed header field, turning JSON type errors into FormatError.
template <typename T>
T header_field(const nlohmann::json& header, const char* key, std::uint64_t offset) {
  try {
    return header.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError(std::string("missing or invalid header field \"") + key + "\"", offset);
  }
}

}  // namespace wernet::detail
