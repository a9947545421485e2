#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wernet/dataset.hpp"
#include "wernet/nn_ops.hpp"

namespace wernet {

/// How the encoder keeps zero-extended positions inert.
///  - no_bias:    bias-free convolutions, nothing else.
///  - bias_mask:  biased convolutions; weights past each ray's length are zeroed after squaring.
///  - no_bias_bn: bias-free convolutions with batch normalization after every hidden convolution.
enum class EncoderVariant { no_bias, bias_mask, no_bias_bn };

std::string_view to_string(EncoderVariant variant);
/// Throws ParameterError for unknown names.
EncoderVariant parse_encoder_variant(std::string_view name);

struct EncoderSpec {
  EncoderVariant variant = EncoderVariant::no_bias_bn;
  int hidden_channels = 32;
  int depth = 2;  // number of convolution layers; the last one outputs a single channel
  double leaky_slope = 0.01;
  double bn_momentum = 0.1;
  double bn_epsilon = 1e-5;

  void validate() const;
  bool has_bias() const { return variant == EncoderVariant::bias_mask; }
  bool has_batchnorm() const { return variant == EncoderVariant::no_bias_bn; }
  bool masks_padding() const { return variant == EncoderVariant::bias_mask; }
  bool operator==(const EncoderSpec&) const = default;
};

/// Dense encoder input, channel-major: feature row r of ray b at position t sits at
/// features[(r * batch + b) * N + t]; zero past each ray's length.
struct EncoderBatch {
  int batch = 0;
  int capacity = 0;
  std::vector<double> features;
  std::vector<int> lengths;

  static EncoderBatch from_padded(std::span<const PaddedInput> inputs);
  /// Gathers dataset rays into `out`, reusing its storage.
  static void gather(const RayDataset& dataset, std::span<const std::size_t> rays, EncoderBatch& out);
};

enum class EncoderMode { train, eval };

/// Activations kept by a forward pass for the matching backward pass. Hidden tensors are
/// channel-major (channels x batch * N).
struct EncoderCache {
  bool valid = false;
  bool training = false;
  int batch = 0;
  int capacity = 0;
  std::vector<int> lengths;
  std::vector<double> input;
  std::vector<std::vector<double>> activations;  // per hidden layer, post leaky ReLU
  std::vector<std::vector<double>> xhat;         // per hidden layer, batch-normalized (BN only)
  std::vector<std::vector<double>> inv_std;      // per hidden layer (BN only)
  std::vector<double> output;                    // last convolution, batch x N
  mutable ConvScratch scratch;  // reused by backward
};

/// Maps padded ray features to non-negative per-position weights:
/// conv -> [BN] -> leaky ReLU -> ... -> conv(->1) -> square [-> mask].
/// All trainable scalars live in one flat vector (see LayerLayout for offsets).
class WeightEncoder {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  struct LayerLayout {
    int in_channels = 0;
    int out_channels = 0;
    std::size_t weight = 0;
    std::size_t bias = npos;
    std::size_t gamma = npos;
    std::size_t beta = npos;
    std::size_t stats = npos;  // offset into the running-stat vectors
    bool operator==(const LayerLayout&) const = default;
  };

  WeightEncoder() = default;
  /// All parameters zero, BN running variance 1.
  explicit WeightEncoder(const EncoderSpec& spec);

  /// Conv weights ~ U(-1/sqrt(3 * in), +1/sqrt(3 * in)), biases 0, gamma 1, beta 0.
  void initialize(std::mt19937_64& rng);

  const EncoderSpec& spec() const { return spec_; }
  const std::vector<LayerLayout>& layers() const { return layers_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  std::span<double> running_mean() { return running_mean_; }
  std::span<const double> running_mean() const { return running_mean_; }
  std::span<double> running_var() { return running_var_; }
  std::span<const double> running_var() const { return running_var_; }

  Conv1dView conv(std::size_t layer) const;
  BatchNormView batchnorm(std::size_t layer) const;

  /// A frozen encoder always runs in eval mode and produces no gradients.
  bool frozen() const { return frozen_; }
  void set_frozen(bool frozen) { frozen_ = frozen; }

  /// Returns batch x N weights. Train mode uses batch statistics and updates running statistics.
  /// Fills `cache` when given.
  std::vector<double> forward(const EncoderBatch& batch, EncoderMode mode, EncoderCache* cache = nullptr);

  /// Gradient of sum(grad_weights * w) w.r.t. all parameters, in parameter order.
  /// Returns an empty vector for a frozen encoder; throws StateError without a valid train-mode cache.
  std::vector<double> backward(const EncoderCache& cache, std::span<const double> grad_weights) const;

  bool operator==(const WeightEncoder&) const = default;

 private:
  EncoderSpec spec_;
  std::vector<LayerLayout> layers_;
  std::vector<double> params_;
  std::vector<double> running_mean_;
  std::vector<double> running_var_;
  bool frozen_ = false;
};

/// Spec-level entry points.
inline std::vector<double> encoder_forward(WeightEncoder& encoder, const EncoderBatch& batch,
                                           EncoderCache* cache = nullptr) {
  return encoder.forward(batch, encoder.frozen() ? EncoderMode::eval : EncoderMode::train, cache);
}
inline std::vector<double> encoder_backward(const WeightEncoder& encoder, const EncoderCache& cache,
                                            std::span<const double> grad_weights) {
  return encoder.backward(cache, grad_weights);
}

}  // namespace wernet
