#include "wernet/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "wernet/errors.hpp"

namespace wernet {

std::string_view to_string(EncoderVariant variant) {
  switch (variant) {
    case EncoderVariant::no_bias:
      return "no_bias";
    case EncoderVariant::bias_mask:
      return "bias_mask";
    case EncoderVariant::no_bias_bn:
      return "no_bias_bn";
  }
  return "unknown";
}

EncoderVariant parse_encoder_variant(std::string_view name) {
  if (name == "no_bias") return EncoderVariant::no_bias;
  if (name == "bias_mask") return EncoderVariant::bias_mask;
  if (name == "no_bias_bn") return EncoderVariant::no_bias_bn;
  throw ParameterError("unknown encoder variant \"" + std::string(name) + "\"");
}

void EncoderSpec::validate() const {
  if (hidden_channels < 1) throw ParameterError("hidden_channels must be >= 1");
  if (depth < 2) throw ParameterError("encoder depth must be >= 2");
  if (!(leaky_slope > 0.0 && leaky_slope <= 1.0)) throw ParameterError("leaky_slope must lie in (0, 1]");
  if (!(bn_epsilon > 0.0)) throw ParameterError("bn_epsilon must be > 0");
  if (!(bn_momentum > 0.0 && bn_momentum <= 1.0)) throw ParameterError("bn_momentum must lie in (0, 1]");
}

EncoderBatch EncoderBatch::from_padded(std::span<const PaddedInput> inputs) {
  EncoderBatch out;
  out.batch = static_cast<int>(inputs.size());
  out.capacity = inputs.empty() ? 0 : inputs.front().capacity;
  const auto n = static_cast<std::size_t>(out.capacity);
  out.features.assign(inputs.size() * kFeatureRows * n, 0.0);
  for (std::size_t b = 0; b < inputs.size(); ++b) {
    const auto& in = inputs[b];
    if (in.capacity != out.capacity || in.features.size() != kFeatureRows * n) {
      throw ShapeError("encoder batch mixes capacities");
    }
    for (std::size_t r = 0; r < kFeatureRows; ++r) {
      std::copy_n(in.features.begin() + static_cast<std::ptrdiff_t>(r * n), n,
                  out.features.begin() + static_cast<std::ptrdiff_t>((r * inputs.size() + b) * n));
    }
    out.lengths.push_back(in.length);
  }
  return out;
}

void EncoderBatch::gather(const RayDataset& dataset, std::span<const std::size_t> rays, EncoderBatch& out) {
  const auto cap = static_cast<std::size_t>(dataset.capacity());
  const std::size_t batch = rays.size();
  out.batch = static_cast<int>(batch);
  out.capacity = static_cast<int>(cap);
  out.features.assign(batch * kFeatureRows * cap, 0.0);
  out.lengths.resize(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    const auto n = static_cast<std::size_t>(dataset.length(rays[b]));
    const auto f = dataset.features(rays[b]);
    out.lengths[b] = static_cast<int>(n);
    for (std::size_t r = 0; r < kFeatureRows; ++r) {
      double* dst = out.features.data() + (r * batch + b) * cap;
      for (std::size_t c = 0; c < n; ++c) dst[c] = f[r * n + c];
    }
  }
}

WeightEncoder::WeightEncoder(const EncoderSpec& spec) : spec_(spec) {
  spec_.validate();
  std::size_t offset = 0;
  std::size_t stats = 0;
  for (int l = 0; l < spec_.depth; ++l) {
    LayerLayout layer;
    layer.in_channels = l == 0 ? kFeatureRows : spec_.hidden_channels;
    layer.out_channels = l + 1 == spec_.depth ? 1 : spec_.hidden_channels;
    const auto out = static_cast<std::size_t>(layer.out_channels);
    layer.weight = offset;
    offset += out * static_cast<std::size_t>(layer.in_channels) * kConvWidth;
    if (spec_.has_bias()) {
      layer.bias = offset;
      offset += out;
    }
    const bool hidden = l + 1 < spec_.depth;
    if (hidden && spec_.has_batchnorm()) {
      layer.gamma = offset;
      offset += out;
      layer.beta = offset;
      offset += out;
      layer.stats = stats;
      stats += out;
    }
    layers_.push_back(layer);
  }
  params_.assign(offset, 0.0);
  for (const auto& layer : layers_) {
    if (layer.gamma != npos) std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(layer.gamma), layer.out_channels, 1.0);
  }
  running_mean_.assign(stats, 0.0);
  running_var_.assign(stats, 1.0);
}

void WeightEncoder::initialize(std::mt19937_64& rng) {
  for (const auto& layer : layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in_channels) * kConvWidth);
    std::uniform_real_distribution<double> uniform(-bound, bound);
    const std::size_t count = static_cast<std::size_t>(layer.out_channels) * layer.in_channels * kConvWidth;
    for (std::size_t i = 0; i < count; ++i) params_[layer.weight + i] = uniform(rng);
    if (layer.bias != npos) std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(layer.bias), layer.out_channels, 0.0);
    if (layer.gamma != npos) {
      std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(layer.gamma), layer.out_channels, 1.0);
      std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(layer.beta), layer.out_channels, 0.0);
    }
  }
  std::fill(running_mean_.begin(), running_mean_.end(), 0.0);
  std::fill(running_var_.begin(), running_var_.end(), 1.0);
}

Conv1dView WeightEncoder::conv(std::size_t layer) const {
  const auto& l = layers_.at(layer);
  const std::size_t count = static_cast<std::size_t>(l.out_channels) * l.in_channels * kConvWidth;
  Conv1dView view{l.in_channels, l.out_channels, std::span<const double>(params_).subspan(l.weight, count), {}};
  if (l.bias != npos) view.bias = std::span<const double>(params_).subspan(l.bias, static_cast<std::size_t>(l.out_channels));
  return view;
}

BatchNormView WeightEncoder::batchnorm(std::size_t layer) const {
  const auto& l = layers_.at(layer);
  if (l.gamma == npos) throw StateError("layer has no batch normalization");
  const auto c = static_cast<std::size_t>(l.out_channels);
  return {l.out_channels, std::span<const double>(params_).subspan(l.gamma, c),
          std::span<const double>(params_).subspan(l.beta, c), spec_.bn_epsilon};
}

std::vector<double> WeightEncoder::forward(const EncoderBatch& batch, EncoderMode mode, EncoderCache* cache) {
  if (layers_.empty()) throw StateError("encoder is not configured");
  const int B = batch.batch;
  const int N = batch.capacity;
  if (B < 1 || N < 1) throw ParameterError("encoder forward needs a non-empty batch");
  const std::size_t m = static_cast<std::size_t>(B) * static_cast<std::size_t>(N);
  if (batch.features.size() != kFeatureRows * m || batch.lengths.size() != static_cast<std::size_t>(B)) {
    throw ShapeError("encoder input must be 6 x batch x N");
  }
  const bool training = mode == EncoderMode::train && !frozen_;

  EncoderCache local;
  EncoderCache& c = cache ? *cache : local;
  const std::size_t hidden = layers_.size() - 1;
  c.valid = false;
  c.training = training;
  c.batch = B;
  c.capacity = N;
  c.lengths = batch.lengths;
  c.input = batch.features;
  if (spec_.masks_padding()) {
    // The mask covers the extension on the way in as well, so stray values there cannot leak
    // into the last real positions through the kernel's right tap.
    for (std::size_t r = 0; r < static_cast<std::size_t>(kFeatureRows); ++r) {
      for (std::size_t b = 0; b < static_cast<std::size_t>(B); ++b) {
        const auto len = static_cast<std::size_t>(std::clamp(batch.lengths[b], 0, N));
        auto* row = c.input.data() + (r * B + b) * N;
        std::fill(row + len, row + N, 0.0);
      }
    }
  }
  c.activations.resize(hidden);
  c.xhat.resize(hidden);
  c.inv_std.resize(hidden);

  std::vector<double> mean;
  std::vector<double> var;
  const std::vector<double>* input = &c.input;

  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    const Conv1dView cv = conv(l);
    std::vector<double>& out = l < hidden ? c.activations[l] : c.output;
    out.resize(static_cast<std::size_t>(layer.out_channels) * m);

    if (l < hidden && layer.gamma != npos) {
      // Convolve into xhat's buffer, then normalize into `out`.
      std::vector<double>& pre = c.xhat[l];
      pre.resize(out.size());
      conv1d_forward_batched(cv, B, N, *input, pre, c.scratch);
      const BatchNormView bn = batchnorm(l);
      const auto ch = static_cast<std::size_t>(layer.out_channels);
      auto rm = std::span<double>(running_mean_).subspan(layer.stats, ch);
      auto rv = std::span<double>(running_var_).subspan(layer.stats, ch);
      if (training) {
        c.inv_std[l].resize(ch);
        mean.resize(ch);
        var.resize(ch);
        batchnorm_forward_train(bn, m, pre, out, pre, c.inv_std[l], mean, var);
        const double mom = spec_.bn_momentum;
        const double count = static_cast<double>(m);
        const double unbias = count > 1.0 ? count / (count - 1.0) : 1.0;
        for (std::size_t k = 0; k < ch; ++k) {
          rm[k] = (1.0 - mom) * rm[k] + mom * mean[k];
          rv[k] = (1.0 - mom) * rv[k] + mom * var[k] * unbias;
        }
      } else {
        batchnorm_forward_eval(bn, m, pre, out, rm, rv);
      }
    } else {
      conv1d_forward_batched(cv, B, N, *input, out, c.scratch);
    }
    if (l < hidden) {
      const double slope = spec_.leaky_slope;
      for (double& v : out) v = leaky_relu(v, slope);
    }
    input = &out;
  }

  std::vector<double> weights(m);
  const auto n = static_cast<std::size_t>(N);
  for (std::size_t b = 0; b < static_cast<std::size_t>(B); ++b) {
    const auto len = static_cast<std::size_t>(c.lengths[b]);
    for (std::size_t t = 0; t < n; ++t) {
      const double z = c.output[b * n + t];
      weights[b * n + t] = spec_.masks_padding() && t >= len ? 0.0 : z * z;
    }
  }
  c.valid = true;
  return weights;
}

std::vector<double> WeightEncoder::backward(const EncoderCache& c, std::span<const double> grad_weights) const {
  if (frozen_) return {};
  if (!c.valid) throw StateError("encoder backward called without a forward cache");
  if (!c.training) throw StateError("encoder backward needs a train-mode forward cache");
  const int B = c.batch;
  const int N = c.capacity;
  const auto n = static_cast<std::size_t>(N);
  const std::size_t m = static_cast<std::size_t>(B) * n;
  if (grad_weights.size() != m) throw ShapeError("grad_weights must be batch x N");

  std::vector<double> grad(params_.size(), 0.0);
  // d/dz of z^2; masked positions contribute nothing.
  std::vector<double> g_out(m);
  for (std::size_t b = 0; b < static_cast<std::size_t>(B); ++b) {
    const auto len = static_cast<std::size_t>(c.lengths[b]);
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t i = b * n + t;
      g_out[i] = spec_.masks_padding() && t >= len ? 0.0 : 2.0 * c.output[i] * grad_weights[i];
    }
  }

  auto& scratch = c.scratch;
  std::vector<double> g_in;
  std::vector<double> g_pre;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& layer = layers_[l];
    const Conv1dView cv = conv(l);
    const std::vector<double>& input = l == 0 ? c.input : c.activations[l - 1];
    const std::size_t w_count = static_cast<std::size_t>(layer.out_channels) * layer.in_channels * kConvWidth;
    auto g_weight = std::span<double>(grad).subspan(layer.weight, w_count);
    auto g_bias = layer.bias != npos ? std::span<double>(grad).subspan(layer.bias, static_cast<std::size_t>(layer.out_channels))
                                     : std::span<double>();
    if (l > 0) g_in.resize(input.size());
    conv1d_backward_batched(cv, B, N, input, g_out, g_weight, g_bias, l > 0 ? std::span<double>(g_in) : std::span<double>(),
                            scratch);
    if (l == 0) break;

    // Back through the previous hidden layer's activation and normalization.
    const std::size_t h = l - 1;
    const auto& act = c.activations[h];
    const double slope = spec_.leaky_slope;
    for (std::size_t i = 0; i < g_in.size(); ++i) {
      if (act[i] < 0.0) g_in[i] *= slope;
    }
    const auto& prev = layers_[h];
    if (prev.gamma != npos) {
      const auto ch = static_cast<std::size_t>(prev.out_channels);
      g_pre.resize(g_in.size());
      batchnorm_backward(batchnorm(h), m, c.xhat[h], c.inv_std[h], g_in, g_pre,
                         std::span<double>(grad).subspan(prev.gamma, ch), std::span<double>(grad).subspan(prev.beta, ch));
      g_out.swap(g_pre);
    } else {
      g_out.swap(g_in);
    }
  }
  return grad;
}

}  // namespace wernet
