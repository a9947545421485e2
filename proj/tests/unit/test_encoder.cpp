#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "wernet/dataset.hpp"
#include "wernet/encoder.hpp"
#include "wernet/errors.hpp"

using namespace wernet;

namespace {

PaddedInput random_input(int n, int capacity, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PaddedInput p;
  p.capacity = capacity;
  p.length = n;
  p.features.assign(static_cast<std::size_t>(kFeatureRows) * capacity, 0.0);
  p.indices.assign(capacity, kPaddingIndex);
  for (int r = 0; r < kFeatureRows; ++r)
    for (int c = 0; c < n; ++c) p.features[r * capacity + c] = u(rng);
  for (int c = 0; c < n; ++c) p.indices[c] = static_cast<std::uint32_t>(c);
  return p;
}

EncoderBatch random_batch(const std::vector<int>& lengths, int capacity, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<PaddedInput> inputs;
  for (int n : lengths) inputs.push_back(random_input(n, capacity, rng));
  return EncoderBatch::from_padded(inputs);
}

WeightEncoder make_encoder(EncoderVariant variant, int depth, std::uint64_t seed, int hidden = 8) {
  EncoderSpec spec;
  spec.variant = variant;
  spec.depth = depth;
  spec.hidden_channels = hidden;
  WeightEncoder enc(spec);
  std::mt19937_64 rng(seed);
  enc.initialize(rng);
  // Move off the symmetric init so every parameter carries gradient.
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (const auto& l : enc.layers()) {
    if (l.bias != WeightEncoder::npos)
      for (int o = 0; o < l.out_channels; ++o) enc.parameters()[l.bias + o] = u(rng);
    if (l.gamma != WeightEncoder::npos)
      for (int o = 0; o < l.out_channels; ++o) {
        enc.parameters()[l.gamma + o] = 1.0 + u(rng);
        enc.parameters()[l.beta + o] = u(rng);
      }
  }
  return enc;
}

}  // namespace

TEST(Encoder, VariantNames) {
  for (auto v : {EncoderVariant::no_bias, EncoderVariant::bias_mask, EncoderVariant::no_bias_bn}) {
    EXPECT_EQ(parse_encoder_variant(to_string(v)), v);
  }
  EXPECT_THROW(parse_encoder_variant("bn"), ParameterError);
}

TEST(Encoder, SpecValidation) {
  EncoderSpec s;
  s.depth = 1;
  EXPECT_THROW(s.validate(), ParameterError);
  s.depth = 2;
  s.leaky_slope = 0.0;
  EXPECT_THROW(s.validate(), ParameterError);
}

TEST(Encoder, LayoutAndInitBounds) {
  EncoderSpec spec;
  spec.variant = EncoderVariant::no_bias_bn;
  WeightEncoder enc(spec);
  ASSERT_EQ(enc.layers().size(), 2u);
  EXPECT_EQ(enc.layers()[0].in_channels, 6);
  EXPECT_EQ(enc.layers()[0].out_channels, 32);
  EXPECT_EQ(enc.layers()[1].out_channels, 1);
  EXPECT_EQ(enc.parameter_count(), 32u * 6 * 3 + 32 + 32 + 32 * 3);
  std::mt19937_64 rng(1);
  enc.initialize(rng);
  const double bound1 = 1.0 / std::sqrt(6.0 * 3.0);
  EXPECT_NEAR(bound1, 0.2357, 1e-4);
  double peak = 0.0;
  for (std::size_t i = 0; i < 32u * 6 * 3; ++i) {
    ASSERT_LE(std::abs(enc.parameters()[i]), bound1);
    peak = std::max(peak, std::abs(enc.parameters()[i]));
  }
  EXPECT_GT(peak, 0.9 * bound1);
  const auto& l1 = enc.layers()[1];
  for (std::size_t i = 0; i < 32u * 3; ++i) ASSERT_LE(std::abs(enc.parameters()[l1.weight + i]), 1.0 / std::sqrt(96.0));
  for (double v : enc.running_var()) EXPECT_EQ(v, 1.0);
}

TEST(Encoder, WeightsAreNonNegative) {
  for (auto variant : {EncoderVariant::no_bias, EncoderVariant::bias_mask, EncoderVariant::no_bias_bn}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      WeightEncoder enc = make_encoder(variant, 2 + static_cast<int>(seed % 2), seed);
      const auto batch = random_batch({5, 9, 1}, 9, seed + 10);
      for (double w : enc.forward(batch, EncoderMode::train)) ASSERT_GE(w, 0.0);
    }
  }
}

TEST(Encoder, NoBiasInteriorPaddingIsZero) {
  WeightEncoder enc = make_encoder(EncoderVariant::no_bias, 2, 3);
  const auto batch = random_batch({4}, 12, 4);
  const auto w = enc.forward(batch, EncoderMode::train);
  // Two width-3 layers reach two columns past the last real one.
  for (int t = 4 + 2; t < 12; ++t) EXPECT_EQ(w[t], 0.0) << t;
}

TEST(Encoder, BiasMaskZeroesPaddingAndIgnoresPaddedFeatures) {
  WeightEncoder enc = make_encoder(EncoderVariant::bias_mask, 2, 5);
  auto batch = random_batch({3, 6}, 8, 6);
  const auto w = enc.forward(batch, EncoderMode::train);
  for (int t = 3; t < 8; ++t) EXPECT_EQ(w[t], 0.0);
  for (int t = 6; t < 8; ++t) EXPECT_EQ(w[8 + t], 0.0);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  auto perturbed = batch;
  for (int r = 0; r < kFeatureRows; ++r)
    for (int b = 0; b < 2; ++b)
      for (int t = batch.lengths[b]; t < 8; ++t) perturbed.features[(r * 2 + b) * 8 + t] = u(rng);
  EXPECT_EQ(enc.forward(perturbed, EncoderMode::train), w);
}

TEST(Encoder, BackwardMatchesFiniteDifferences) {
  for (auto variant : {EncoderVariant::no_bias, EncoderVariant::bias_mask, EncoderVariant::no_bias_bn}) {
    for (int depth : {2, 3}) {
      WeightEncoder enc = make_encoder(variant, depth, 11 + depth);
      const auto batch = random_batch({4, 6}, 6, 12);
      std::mt19937_64 rng(13);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      std::vector<double> gw(2 * 6);
      for (double& g : gw) g = u(rng);

      EncoderCache cache;
      enc.forward(batch, EncoderMode::train, &cache);
      const auto grad = enc.backward(cache, gw);
      ASSERT_EQ(grad.size(), enc.parameter_count());

      auto objective = [&] {
        const auto w = enc.forward(batch, EncoderMode::train);
        double acc = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) acc += gw[i] * w[i];
        return acc;
      };
      auto params = enc.parameters();
      for (std::size_t i = 0; i < params.size(); ++i) {
        const double fd = oracle::central_difference(objective, params[i], 1e-5);
        ASSERT_LT(oracle::relative_error(grad[i], fd, 1e-6), 1e-5)
            << to_string(variant) << " depth " << depth << " param " << i << ": " << grad[i] << " vs " << fd;
      }
    }
  }
}

TEST(Encoder, ZeroUpstreamGivesZeroGradients) {
  WeightEncoder enc = make_encoder(EncoderVariant::no_bias_bn, 2, 21);
  const auto batch = random_batch({3, 5}, 5, 22);
  EncoderCache cache;
  enc.forward(batch, EncoderMode::train, &cache);
  for (double g : enc.backward(cache, std::vector<double>(10, 0.0))) EXPECT_EQ(g, 0.0);
}

TEST(Encoder, FrozenProducesNoGradientsAndKeepsStatistics) {
  WeightEncoder enc = make_encoder(EncoderVariant::no_bias_bn, 2, 23);
  enc.set_frozen(true);
  const WeightEncoder before = enc;
  const auto batch = random_batch({3, 5}, 5, 24);
  EncoderCache cache;
  const auto w = encoder_forward(enc, batch, &cache);
  EXPECT_TRUE(enc.backward(cache, w).empty());
  EXPECT_EQ(enc, before);
}

TEST(Encoder, TrainModeUpdatesRunningStatsAndEvalUsesThem) {
  WeightEncoder enc = make_encoder(EncoderVariant::no_bias_bn, 2, 25);
  const auto batch = random_batch({5, 5, 5}, 5, 26);
  const auto mean0 = std::vector<double>(enc.running_mean().begin(), enc.running_mean().end());
  enc.forward(batch, EncoderMode::train);
  EXPECT_NE(std::vector<double>(enc.running_mean().begin(), enc.running_mean().end()), mean0);
  const WeightEncoder snapshot = enc;
  const auto e1 = enc.forward(batch, EncoderMode::eval);
  EXPECT_EQ(enc, snapshot);
  EXPECT_EQ(enc.forward(batch, EncoderMode::eval), e1);
}

TEST(Encoder, BackwardNeedsTrainCache) {
  WeightEncoder enc = make_encoder(EncoderVariant::no_bias, 2, 27);
  EncoderCache empty;
  EXPECT_THROW(enc.backward(empty, {}), StateError);
  const auto batch = random_batch({2}, 3, 28);
  EncoderCache eval_cache;
  enc.forward(batch, EncoderMode::eval, &eval_cache);
  EXPECT_THROW(enc.backward(eval_cache, std::vector<double>(3)), StateError);
}
