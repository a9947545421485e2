#include "wernet/checkpoint.hpp"

#include <string>

#include "binary_io.hpp"

namespace wernet {

namespace {

std::vector<int> channel_sizes(const WeightEncoder& encoder) {
  std::vector<int> channels;
  for (const auto& layer : encoder.layers()) {
    if (channels.empty()) channels.push_back(layer.in_channels);
    channels.push_back(layer.out_channels);
  }
  return channels;
}

}  // namespace

std::vector<unsigned char> encode_checkpoint(const EncoderCheckpoint& checkpoint) {
  const auto& e = checkpoint.encoder;
  const auto& spec = e.spec();
  detail::ByteWriter w;
  w.magic("WEN1");
  w.json_header({{"variant", std::string(to_string(spec.variant))},
                 {"channels", channel_sizes(e)},
                 {"depth", spec.depth},
                 {"leaky_slope", spec.leaky_slope},
                 {"bn_momentum", spec.bn_momentum},
                 {"bn_epsilon", spec.bn_epsilon},
                 {"parameter_count", e.parameter_count()},
                 {"stat_count", e.running_mean().size()},
                 {"provenance", checkpoint.provenance}});
  for (double v : e.parameters()) w.f32(v);
  for (double v : e.running_mean()) w.f32(v);
  for (double v : e.running_var()) w.f32(v);
  return w.bytes();
}

EncoderCheckpoint decode_checkpoint(std::vector<unsigned char> bytes) {
  detail::ByteReader r(std::move(bytes));
  r.expect_magic("WEN1");
  const auto at = r.offset();
  const auto header = r.json_header();

  EncoderSpec spec;
  try {
    spec.variant = parse_encoder_variant(detail::header_field<std::string>(header, "variant", at));
  } catch (const ParameterError& e) {
    throw FormatError(e.what(), at);
  }
  const auto channels = detail::header_field<std::vector<int>>(header, "channels", at);
  spec.depth = detail::header_field<int>(header, "depth", at);
  spec.leaky_slope = detail::header_field<double>(header, "leaky_slope", at);
  spec.bn_momentum = detail::header_field<double>(header, "bn_momentum", at);
  spec.bn_epsilon = detail::header_field<double>(header, "bn_epsilon", at);
  if (channels.size() != static_cast<std::size_t>(spec.depth) + 1 || spec.depth < 2 || channels.front() != kFeatureRows ||
      channels.back() != 1) {
    throw FormatError("channel sizes do not describe a weight encoder", at);
  }
  spec.hidden_channels = channels[1];
  for (std::size_t i = 1; i + 1 < channels.size(); ++i) {
    if (channels[i] != spec.hidden_channels) throw FormatError("hidden layers must share one width", at);
  }

  EncoderCheckpoint out;
  try {
    out.encoder = WeightEncoder(spec);
  } catch (const ParameterError& e) {
    throw FormatError(e.what(), at);
  }
  const auto params = detail::header_field<std::size_t>(header, "parameter_count", at);
  const auto stats = detail::header_field<std::size_t>(header, "stat_count", at);
  if (params != out.encoder.parameter_count() || stats != out.encoder.running_mean().size()) {
    throw FormatError("parameter counts disagree with the declared architecture", at);
  }
  if (header.contains("provenance")) out.provenance = header.at("provenance");
  if (r.remaining() != (params + 2 * stats) * sizeof(float)) {
    throw FormatError("payload size does not match parameter counts", r.offset());
  }
  for (double& v : out.encoder.parameters()) v = r.f32();
  for (double& v : out.encoder.running_mean()) v = r.f32();
  for (double& v : out.encoder.running_var()) v = r.f32();
  r.expect_end();
  return out;
}

void save_checkpoint(const EncoderCheckpoint& checkpoint, const std::filesystem::path& path) {
  detail::write_file(path, encode_checkpoint(checkpoint));
}

EncoderCheckpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(detail::read_file(path));
}

void round_to_float32(WeightEncoder& encoder) {
  auto round = [](std::span<double> xs) {
    for (double& x : xs) x = static_cast<double>(static_cast<float>(x));
  };
  round(encoder.parameters());
  round(encoder.running_mean());
  round(encoder.running_var());
}

}  // namespace wernet
