#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "wernet/dataset.hpp"
#include "wernet/encoder.hpp"
#include "wernet/optimizer.hpp"
#include "wernet/voxel_grid.hpp"

namespace wernet {

struct TrainConfig {
  double lr_voxel = 0.01;
  double lr_encoder = 5e-4;
  double lr_decay = 0.5;
  int decay_period = 5;  // epochs
  int epochs = 80;
  int batch_samples = 32;
  int rays_per_sample = 100;
  AdamConfig adam;
  EncoderSpec encoder;
  bool grad_norm = true;
  bool clamp_voxels = true;
  double voxel_init_max = 0.1;
  /// Adds one record per optimizer step during the first epoch.
  bool log_first_epoch_steps = false;

  int rays_per_step() const { return batch_samples * rays_per_sample; }
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

/// One metric-log row. `epoch` counts completed epochs: whole numbers for end-of-epoch rows,
/// fractional for per-step rows.
struct MetricRecord {
  double epoch = 0.0;
  long step = 0;
  double loss = 0.0;
  std::optional<double> cosine_similarity;
  double lr_voxel = 0.0;
  double lr_encoder = 0.0;
  double wall_ms = 0.0;
  bool per_step = false;

  std::optional<double> cosine_distance() const {
    if (!cosine_similarity) return std::nullopt;
    return 1.0 - *cosine_similarity;
  }
};

struct TrainState {
  VoxelGrid voxels;
  WeightEncoder encoder;
  Adam voxel_adam;
  Adam encoder_adam;
  int epoch = 0;
  long step = 0;
  std::mt19937_64 rng;
  std::vector<MetricRecord> history;

  /// End-of-epoch rows only.
  std::vector<MetricRecord> epoch_history() const;
  std::optional<double> final_similarity() const;
};

/// Voxels ~ U[0, voxel_init_max], encoder initialized per WeightEncoder::initialize, zero moments.
/// Deterministic in `seed`.
TrainState init_state(const GridGeometry& grid, const TrainConfig& config, std::uint64_t seed);

/// Forward/backward over one batch of rays with reusable scratch buffers.
class BatchRunner {
 public:
  /// Mean-squared pixel error of the batch (forward only).
  double loss(TrainState& state, const RayDataset& dataset, std::span<const std::size_t> rays);

  /// Returns the loss and overwrites voxel_grad (size = voxel count) and encoder_grad
  /// (size = encoder parameter count, or empty for a frozen encoder).
  double gradients(TrainState& state, const RayDataset& dataset, std::span<const std::size_t> rays, bool grad_norm,
                   std::vector<double>& voxel_grad, std::vector<double>& encoder_grad);

 private:
  double forward(TrainState& state, const RayDataset& dataset, std::span<const std::size_t> rays);

  EncoderBatch batch_;
  EncoderCache cache_;
  std::vector<double> weights_;
  std::vector<double> values_;
  std::vector<double> residuals_;
  std::vector<double> grad_w_;
  std::vector<double> grad_v_;
};

using MetricCallback = std::function<void(const MetricRecord&)>;

/// Runs config.epochs epochs: per epoch a seeded shuffle, then batches of rays_per_step rays
/// (trailing partial batch included), one Adam step per parameter group per batch.
/// Throws ParameterError on an empty dataset and TrainingError on a non-finite loss or gradient.
TrainState train(const RayDataset& dataset, const TrainConfig& config, std::uint64_t seed,
                 const VoxelGrid* ground_truth = nullptr, const MetricCallback& on_record = {});

/// Same loop with a frozen copy of `encoder`; only voxels are updated.
TrainState transfer_train(const WeightEncoder& encoder, const RayDataset& dataset, const TrainConfig& config,
                          std::uint64_t seed, const VoxelGrid* ground_truth = nullptr,
                          const MetricCallback& on_record = {});

/// Continues training `state` for config.epochs more epochs.
void run_epochs(TrainState& state, const RayDataset& dataset, const TrainConfig& config,
                const VoxelGrid* ground_truth = nullptr, const MetricCallback& on_record = {});

/// CSV with header epoch,step,loss,cosine_similarity,lr_voxel,lr_encoder,wall_ms.
void write_metrics_csv(const std::vector<MetricRecord>& records, const std::filesystem::path& path);

}  // namespace wernet
