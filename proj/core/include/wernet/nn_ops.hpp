#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wernet {

/// Width-3, stride-1, padding-1 1-D convolution. Weights are [out][in][3]; bias is empty or [out].
struct Conv1dView {
  int in_channels = 0;
  int out_channels = 0;
  std::span<const double> weight;
  std::span<const double> bias;
};

inline constexpr int kConvWidth = 3;

/// input is in_channels x length, output out_channels x length (row-major). Borders are zero-padded.
/// Throws ShapeError on mismatched spans.
void conv1d_forward(const Conv1dView& conv, int length, std::span<const double> input, std::span<double> output);

/// Accumulates dL/dweight and dL/dbias (bias span may be empty) and, if grad_input is non-empty,
/// adds dL/dinput.
void conv1d_backward(const Conv1dView& conv, int length, std::span<const double> input,
                     std::span<const double> grad_output, std::span<double> grad_weight,
                     std::span<double> grad_bias, std::span<double> grad_input);

inline double leaky_relu(double x, double slope) { return x >= 0.0 ? x : slope * x; }

/// Batched form on channel-major tensors: each channel row holds `batch` consecutive sequences of
/// `length` values, so tensors are channels x (batch * length). Sequences are convolved independently.
/// Scratch buffers are reused across calls.
struct ConvScratch {
  std::vector<double> stacked;
  std::vector<double> grad_stacked;
};

void conv1d_forward_batched(const Conv1dView& conv, int batch, int length, std::span<const double> input,
                            std::span<double> output, ConvScratch& scratch);

/// Accumulates into grad_weight / grad_bias (bias span may be empty); overwrites grad_input when non-empty.
void conv1d_backward_batched(const Conv1dView& conv, int batch, int length, std::span<const double> input,
                             std::span<const double> grad_output, std::span<double> grad_weight,
                             std::span<double> grad_bias, std::span<double> grad_input, ConvScratch& scratch);

/// Per-channel batch normalization on a channel-major channels x count tensor, where count is
/// batch * length.
struct BatchNormView {
  int channels = 0;
  std::span<const double> gamma;
  std::span<const double> beta;
  double epsilon = 1e-5;
};

/// Training mode: normalizes with the batch statistics over all `count` positions. Writes the
/// normalized (pre gamma/beta) values to xhat, the affine output to output, and 1/sqrt(var + eps)
/// per channel to inv_std. batch_mean / batch_var receive the biased batch statistics.
/// Throws ParameterError for an empty batch.
void batchnorm_forward_train(const BatchNormView& bn, std::size_t count, std::span<const double> input,
                             std::span<double> output, std::span<double> xhat, std::span<double> inv_std,
                             std::span<double> batch_mean, std::span<double> batch_var);

/// Inference mode: normalizes with the supplied running statistics.
void batchnorm_forward_eval(const BatchNormView& bn, std::size_t count, std::span<const double> input,
                            std::span<double> output, std::span<const double> running_mean,
                            std::span<const double> running_var);

/// Backward of the training-mode forward. grad_input is overwritten; grad_gamma / grad_beta accumulate.
void batchnorm_backward(const BatchNormView& bn, std::size_t count, std::span<const double> xhat,
                        std::span<const double> inv_std, std::span<const double> grad_output,
                        std::span<double> grad_input, std::span<double> grad_gamma, std::span<double> grad_beta);

}  // namespace wernet
