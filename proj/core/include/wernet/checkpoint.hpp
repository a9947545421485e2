#pragma once

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "wernet/encoder.hpp"

namespace wernet {

struct EncoderCheckpoint {
  WeightEncoder encoder;
  nlohmann::json provenance = nlohmann::json::object();
};

// WEN1: "WEN1", u32 header length, JSON {"variant","channels","depth","leaky_slope","bn_momentum",
// "bn_epsilon","parameter_count","stat_count","provenance"}, then the flat parameter vector, running
// means and running variances as little-endian float32.
std::vector<unsigned char> encode_checkpoint(const EncoderCheckpoint& checkpoint);
EncoderCheckpoint decode_checkpoint(std::vector<unsigned char> bytes);
void save_checkpoint(const EncoderCheckpoint& checkpoint, const std::filesystem::path& path);
EncoderCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Rounds every parameter and running statistic to float32 precision, i.e. what a WEN1
/// round-trip preserves.
void round_to_float32(WeightEncoder& encoder);

}  // namespace wernet
