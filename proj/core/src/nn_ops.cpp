#include "wernet/nn_ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include <Eigen/Core>

#include "wernet/errors.hpp"

namespace wernet {

namespace {

void check_conv_shapes(const Conv1dView& conv, int length, std::size_t input, std::size_t output) {
  const auto in = static_cast<std::size_t>(conv.in_channels);
  const auto out = static_cast<std::size_t>(conv.out_channels);
  const auto n = static_cast<std::size_t>(length);
  if (conv.in_channels < 1 || conv.out_channels < 1 || length < 1) throw ShapeError("conv1d: empty shape");
  if (conv.weight.size() != out * in * kConvWidth) throw ShapeError("conv1d: weight must be out x in x 3");
  if (!conv.bias.empty() && conv.bias.size() != out) throw ShapeError("conv1d: bias must have out entries");
  if (input != in * n) {
    throw ShapeError("conv1d: input has " + std::to_string(input) + " values, expected " + std::to_string(in * n));
  }
  if (output != out * n) throw ShapeError("conv1d: output size mismatch");
}

}  // namespace

void conv1d_forward(const Conv1dView& conv, int length, std::span<const double> input, std::span<double> output) {
  check_conv_shapes(conv, length, input.size(), output.size());
  const int n = length;
  for (int o = 0; o < conv.out_channels; ++o) {
    double* out = output.data() + static_cast<std::size_t>(o) * n;
    const double b = conv.bias.empty() ? 0.0 : conv.bias[static_cast<std::size_t>(o)];
    for (int t = 0; t < n; ++t) out[t] = b;
    for (int i = 0; i < conv.in_channels; ++i) {
      const double* in = input.data() + static_cast<std::size_t>(i) * n;
      const double* w = conv.weight.data() + (static_cast<std::size_t>(o) * conv.in_channels + i) * kConvWidth;
      const double w_left = w[0];
      const double w_mid = w[1];
      const double w_right = w[2];
      // out[t] += w0 * in[t-1] + w1 * in[t] + w2 * in[t+1]
      for (int t = 0; t < n; ++t) out[t] += w_mid * in[t];
      for (int t = 1; t < n; ++t) out[t] += w_left * in[t - 1];
      for (int t = 0; t + 1 < n; ++t) out[t] += w_right * in[t + 1];
    }
  }
}

void conv1d_backward(const Conv1dView& conv, int length, std::span<const double> input,
                     std::span<const double> grad_output, std::span<double> grad_weight,
                     std::span<double> grad_bias, std::span<double> grad_input) {
  check_conv_shapes(conv, length, input.size(), grad_output.size());
  if (grad_weight.size() != conv.weight.size()) throw ShapeError("conv1d: grad_weight size mismatch");
  if (!grad_bias.empty() && grad_bias.size() != static_cast<std::size_t>(conv.out_channels)) {
    throw ShapeError("conv1d: grad_bias size mismatch");
  }
  if (!grad_input.empty() && grad_input.size() != input.size()) throw ShapeError("conv1d: grad_input size mismatch");

  const int n = length;
  for (int o = 0; o < conv.out_channels; ++o) {
    const double* g = grad_output.data() + static_cast<std::size_t>(o) * n;
    if (!grad_bias.empty()) {
      double acc = 0.0;
      for (int t = 0; t < n; ++t) acc += g[t];
      grad_bias[static_cast<std::size_t>(o)] += acc;
    }
    for (int i = 0; i < conv.in_channels; ++i) {
      const double* in = input.data() + static_cast<std::size_t>(i) * n;
      const std::size_t w_off = (static_cast<std::size_t>(o) * conv.in_channels + i) * kConvWidth;
      double left = 0.0;
      double mid = 0.0;
      double right = 0.0;
      for (int t = 0; t < n; ++t) mid += g[t] * in[t];
      for (int t = 1; t < n; ++t) left += g[t] * in[t - 1];
      for (int t = 0; t + 1 < n; ++t) right += g[t] * in[t + 1];
      grad_weight[w_off] += left;
      grad_weight[w_off + 1] += mid;
      grad_weight[w_off + 2] += right;
      if (!grad_input.empty()) {
        const double* w = conv.weight.data() + w_off;
        double* gi = grad_input.data() + static_cast<std::size_t>(i) * n;
        for (int t = 0; t < n; ++t) gi[t] += w[1] * g[t];
        for (int t = 1; t < n; ++t) gi[t - 1] += w[0] * g[t];
        for (int t = 0; t + 1 < n; ++t) gi[t + 1] += w[2] * g[t];
      }
    }
  }
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

// dst[t] = src[t - 1] within each sequence, 0 at t = 0. `add` accumulates instead of assigning.
void shift_from_left(const double* src, double* dst, std::size_t rows, int batch, int length, bool add) {
  const auto n = static_cast<std::size_t>(length);
  for (std::size_t r = 0; r < rows; ++r) {
    for (int b = 0; b < batch; ++b) {
      const std::size_t off = (r * static_cast<std::size_t>(batch) + static_cast<std::size_t>(b)) * n;
      const double* s = src + off;
      double* d = dst + off;
      if (add) {
        for (std::size_t t = 1; t < n; ++t) d[t] += s[t - 1];
      } else {
        d[0] = 0.0;
        for (std::size_t t = 1; t < n; ++t) d[t] = s[t - 1];
      }
    }
  }
}

// dst[t] = src[t + 1] within each sequence, 0 at t = length - 1.
void shift_from_right(const double* src, double* dst, std::size_t rows, int batch, int length, bool add) {
  const auto n = static_cast<std::size_t>(length);
  for (std::size_t r = 0; r < rows; ++r) {
    for (int b = 0; b < batch; ++b) {
      const std::size_t off = (r * static_cast<std::size_t>(batch) + static_cast<std::size_t>(b)) * n;
      const double* s = src + off;
      double* d = dst + off;
      if (add) {
        for (std::size_t t = 0; t + 1 < n; ++t) d[t] += s[t + 1];
      } else {
        for (std::size_t t = 0; t + 1 < n; ++t) d[t] = s[t + 1];
        d[n - 1] = 0.0;
      }
    }
  }
}

// Taps side by side: W(o, k * in + i) = weight[o][i][k].
RowMatrix wide_weights(const Conv1dView& conv) {
  RowMatrix w(conv.out_channels, kConvWidth * conv.in_channels);
  for (int o = 0; o < conv.out_channels; ++o) {
    for (int i = 0; i < conv.in_channels; ++i) {
      for (int k = 0; k < kConvWidth; ++k) {
        w(o, k * conv.in_channels + i) = conv.weight[(static_cast<std::size_t>(o) * conv.in_channels + i) * kConvWidth + k];
      }
    }
  }
  return w;
}

// Taps stacked: W(k * out + o, i) = weight[o][i][k].
RowMatrix tall_weights(const Conv1dView& conv) {
  RowMatrix w(kConvWidth * conv.out_channels, conv.in_channels);
  for (int o = 0; o < conv.out_channels; ++o) {
    for (int i = 0; i < conv.in_channels; ++i) {
      for (int k = 0; k < kConvWidth; ++k) {
        w(k * conv.out_channels + o, i) = conv.weight[(static_cast<std::size_t>(o) * conv.in_channels + i) * kConvWidth + k];
      }
    }
  }
  return w;
}

// Stacks the shifted copies of x (rows x count) into dst (3 rows x count).
void stack_shifted(const double* x, double* dst, std::size_t rows, int batch, int length) {
  const std::size_t block = rows * static_cast<std::size_t>(batch) * static_cast<std::size_t>(length);
  shift_from_left(x, dst, rows, batch, length, false);
  std::copy(x, x + block, dst + block);
  shift_from_right(x, dst + 2 * block, rows, batch, length, false);
}

// Widening the input (im2col) is cheaper when the layer does not shrink the channel count.
bool widen_input(const Conv1dView& conv) { return conv.in_channels <= conv.out_channels; }

}  // namespace

void conv1d_forward_batched(const Conv1dView& conv, int batch, int length, std::span<const double> input,
                            std::span<double> output, ConvScratch& scratch) {
  if (batch < 1) throw ShapeError("conv1d: empty batch");
  const auto m = static_cast<std::size_t>(batch) * static_cast<std::size_t>(length);
  check_conv_shapes(conv, static_cast<int>(m), input.size(), output.size());
  const auto in = static_cast<Eigen::Index>(conv.in_channels);
  const auto out = static_cast<Eigen::Index>(conv.out_channels);
  const auto cols = static_cast<Eigen::Index>(m);
  MutMap y(output.data(), out, cols);

  if (widen_input(conv)) {
    scratch.stacked.resize(static_cast<std::size_t>(kConvWidth) * input.size());
    stack_shifted(input.data(), scratch.stacked.data(), static_cast<std::size_t>(in), batch, length);
    y.noalias() = wide_weights(conv) * ConstMap(scratch.stacked.data(), kConvWidth * in, cols);
  } else {
    scratch.stacked.resize(static_cast<std::size_t>(kConvWidth) * output.size());
    MutMap taps(scratch.stacked.data(), kConvWidth * out, cols);
    taps.noalias() = tall_weights(conv) * ConstMap(input.data(), in, cols);
    const std::size_t block = output.size();
    std::copy(scratch.stacked.data() + block, scratch.stacked.data() + 2 * block, output.data());
    shift_from_left(scratch.stacked.data(), output.data(), static_cast<std::size_t>(out), batch, length, true);
    shift_from_right(scratch.stacked.data() + 2 * block, output.data(), static_cast<std::size_t>(out), batch, length,
                     true);
  }
  if (!conv.bias.empty()) {
    for (Eigen::Index o = 0; o < out; ++o) y.row(o).array() += conv.bias[static_cast<std::size_t>(o)];
  }
}

void conv1d_backward_batched(const Conv1dView& conv, int batch, int length, std::span<const double> input,
                             std::span<const double> grad_output, std::span<double> grad_weight,
                             std::span<double> grad_bias, std::span<double> grad_input, ConvScratch& scratch) {
  if (batch < 1) throw ShapeError("conv1d: empty batch");
  const auto m = static_cast<std::size_t>(batch) * static_cast<std::size_t>(length);
  check_conv_shapes(conv, static_cast<int>(m), input.size(), grad_output.size());
  if (grad_weight.size() != conv.weight.size()) throw ShapeError("conv1d: grad_weight size mismatch");
  if (!grad_bias.empty() && grad_bias.size() != static_cast<std::size_t>(conv.out_channels)) {
    throw ShapeError("conv1d: grad_bias size mismatch");
  }
  if (!grad_input.empty() && grad_input.size() != input.size()) throw ShapeError("conv1d: grad_input size mismatch");

  const auto in = static_cast<Eigen::Index>(conv.in_channels);
  const auto out = static_cast<Eigen::Index>(conv.out_channels);
  const auto cols = static_cast<Eigen::Index>(m);
  ConstMap gy(grad_output.data(), out, cols);
  ConstMap x(input.data(), in, cols);

  if (!grad_bias.empty()) {
    // Plain loop: Eigen's vectorized redux rounds differently depending on buffer alignment.
    for (std::size_t o = 0; o < static_cast<std::size_t>(out); ++o) {
      const double* row = grad_output.data() + o * m;
      double acc = 0.0;
      for (std::size_t c = 0; c < m; ++c) acc += row[c];
      grad_bias[o] += acc;
    }
  }

  auto scatter_weight_grad = [&](const RowMatrix& g, bool wide) {
    for (int o = 0; o < conv.out_channels; ++o) {
      for (int i = 0; i < conv.in_channels; ++i) {
        for (int k = 0; k < kConvWidth; ++k) {
          const double v = wide ? g(o, k * conv.in_channels + i) : g(k * conv.out_channels + o, i);
          grad_weight[(static_cast<std::size_t>(o) * conv.in_channels + i) * kConvWidth + k] += v;
        }
      }
    }
  };

  if (widen_input(conv)) {
    scratch.stacked.resize(static_cast<std::size_t>(kConvWidth) * input.size());
    stack_shifted(input.data(), scratch.stacked.data(), static_cast<std::size_t>(in), batch, length);
    ConstMap xcol(scratch.stacked.data(), kConvWidth * in, cols);
    const RowMatrix gw = gy * xcol.transpose();
    scatter_weight_grad(gw, true);
    if (!grad_input.empty()) {
      scratch.grad_stacked.resize(scratch.stacked.size());
      MutMap gcol(scratch.grad_stacked.data(), kConvWidth * in, cols);
      gcol.noalias() = wide_weights(conv).transpose() * gy;
      const std::size_t block = input.size();
      const double* g = scratch.grad_stacked.data();
      std::copy(g + block, g + 2 * block, grad_input.data());
      shift_from_right(g, grad_input.data(), static_cast<std::size_t>(in), batch, length, true);
      shift_from_left(g + 2 * block, grad_input.data(), static_cast<std::size_t>(in), batch, length, true);
    }
  } else {
    scratch.grad_stacked.resize(static_cast<std::size_t>(kConvWidth) * grad_output.size());
    double* gp = scratch.grad_stacked.data();
    const std::size_t block = grad_output.size();
    shift_from_right(grad_output.data(), gp, static_cast<std::size_t>(out), batch, length, false);
    std::copy(grad_output.begin(), grad_output.end(), gp + block);
    shift_from_left(grad_output.data(), gp + 2 * block, static_cast<std::size_t>(out), batch, length, false);
    ConstMap gtaps(gp, kConvWidth * out, cols);
    const RowMatrix gw = gtaps * x.transpose();
    scatter_weight_grad(gw, false);
    if (!grad_input.empty()) {
      MutMap gx(grad_input.data(), in, cols);
      gx.noalias() = tall_weights(conv).transpose() * gtaps;
    }
  }
}

void batchnorm_forward_train(const BatchNormView& bn, std::size_t count, std::span<const double> input,
                             std::span<double> output, std::span<double> xhat, std::span<double> inv_std,
                             std::span<double> batch_mean, std::span<double> batch_var) {
  if (count == 0) throw ParameterError("batch normalization needs a non-empty batch");
  const auto c_count = static_cast<std::size_t>(bn.channels);
  const std::size_t total = c_count * count;
  if (input.size() != total || output.size() != total || xhat.size() != total || inv_std.size() != c_count ||
      batch_mean.size() != c_count || batch_var.size() != c_count || bn.gamma.size() != c_count ||
      bn.beta.size() != c_count) {
    throw ShapeError("batchnorm: shape mismatch");
  }
  const double denom = static_cast<double>(count);
  for (std::size_t c = 0; c < c_count; ++c) {
    const double* x = input.data() + c * count;
    double sum = 0.0;
    for (std::size_t t = 0; t < count; ++t) sum += x[t];
    const double mean = sum / denom;
    double sq = 0.0;
    for (std::size_t t = 0; t < count; ++t) sq += (x[t] - mean) * (x[t] - mean);
    const double var = sq / denom;
    const double istd = 1.0 / std::sqrt(var + bn.epsilon);
    batch_mean[c] = mean;
    batch_var[c] = var;
    inv_std[c] = istd;
    const double g = bn.gamma[c];
    const double be = bn.beta[c];
    double* h = xhat.data() + c * count;
    double* y = output.data() + c * count;
    for (std::size_t t = 0; t < count; ++t) {
      h[t] = (x[t] - mean) * istd;
      y[t] = g * h[t] + be;
    }
  }
}

void batchnorm_forward_eval(const BatchNormView& bn, std::size_t count, std::span<const double> input,
                            std::span<double> output, std::span<const double> running_mean,
                            std::span<const double> running_var) {
  if (count == 0) throw ParameterError("batch normalization needs a non-empty batch");
  const auto c_count = static_cast<std::size_t>(bn.channels);
  const std::size_t total = c_count * count;
  if (input.size() != total || output.size() != total || running_mean.size() != c_count ||
      running_var.size() != c_count || bn.gamma.size() != c_count || bn.beta.size() != c_count) {
    throw ShapeError("batchnorm: shape mismatch");
  }
  for (std::size_t c = 0; c < c_count; ++c) {
    const double istd = 1.0 / std::sqrt(running_var[c] + bn.epsilon);
    const double scale = bn.gamma[c] * istd;
    const double shift = bn.beta[c] - running_mean[c] * scale;
    const double* x = input.data() + c * count;
    double* y = output.data() + c * count;
    for (std::size_t t = 0; t < count; ++t) y[t] = x[t] * scale + shift;
  }
}

void batchnorm_backward(const BatchNormView& bn, std::size_t count, std::span<const double> xhat,
                        std::span<const double> inv_std, std::span<const double> grad_output,
                        std::span<double> grad_input, std::span<double> grad_gamma, std::span<double> grad_beta) {
  const auto c_count = static_cast<std::size_t>(bn.channels);
  const std::size_t total = c_count * count;
  if (count == 0 || xhat.size() != total || grad_output.size() != total || grad_input.size() != total ||
      inv_std.size() != c_count || grad_gamma.size() != c_count || grad_beta.size() != c_count) {
    throw ShapeError("batchnorm backward: shape mismatch");
  }
  const double denom = static_cast<double>(count);
  for (std::size_t c = 0; c < c_count; ++c) {
    const double* dy = grad_output.data() + c * count;
    const double* h = xhat.data() + c * count;
    double sum_dy = 0.0;
    double sum_dy_xhat = 0.0;
    for (std::size_t t = 0; t < count; ++t) {
      sum_dy += dy[t];
      sum_dy_xhat += dy[t] * h[t];
    }
    grad_beta[c] += sum_dy;
    grad_gamma[c] += sum_dy_xhat;
    const double k = bn.gamma[c] * inv_std[c] / denom;
    double* dx = grad_input.data() + c * count;
    for (std::size_t t = 0; t < count; ++t) dx[t] = k * (denom * dy[t] - sum_dy - h[t] * sum_dy_xhat);
  }
}

}  // namespace wernet
