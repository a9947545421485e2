#include "wernet/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "wernet/errors.hpp"
#include "wernet/metrics.hpp"
#include "wernet/ray_model.hpp"

namespace wernet {

void TrainConfig::validate() const {
  if (!(lr_voxel > 0.0) || !(lr_encoder > 0.0)) throw ParameterError("learning rates must be > 0");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw ParameterError("lr_decay must lie in (0, 1]");
  if (decay_period < 1) throw ParameterError("decay_period must be >= 1");
  if (epochs < 0) throw ParameterError("epochs must be >= 0");
  if (batch_samples < 1 || rays_per_sample < 1) throw ParameterError("batch_samples and rays_per_sample must be >= 1");
  if (!(voxel_init_max >= 0.0)) throw ParameterError("voxel_init_max must be >= 0");
  adam.validate();
  encoder.validate();
}

std::vector<MetricRecord> TrainState::epoch_history() const {
  std::vector<MetricRecord> out;
  for (const auto& r : history) {
    if (!r.per_step) out.push_back(r);
  }
  return out;
}

std::optional<double> TrainState::final_similarity() const {
  for (auto it = history.rbegin(); it != history.rend(); ++it) {
    if (!it->per_step) return it->cosine_similarity;
  }
  return std::nullopt;
}

TrainState init_state(const GridGeometry& grid, const TrainConfig& config, std::uint64_t seed) {
  config.validate();
  grid.validate();
  TrainState state;
  state.rng.seed(seed);
  std::vector<double> values(grid.dims.count());
  std::uniform_real_distribution<double> uniform(0.0, config.voxel_init_max);
  for (auto& v : values) v = uniform(state.rng);
  state.voxels = VoxelGrid(grid, std::move(values));
  state.encoder = WeightEncoder(config.encoder);
  state.encoder.initialize(state.rng);
  state.voxel_adam = Adam(state.voxels.size(), config.adam);
  state.encoder_adam = Adam(state.encoder.parameter_count(), config.adam);
  return state;
}

double BatchRunner::forward(TrainState& state, const RayDataset& dataset, std::span<const std::size_t> rays) {
  if (rays.empty()) throw ParameterError("batch has no rays");
  EncoderBatch::gather(dataset, rays, batch_);
  weights_ = state.encoder.forward(batch_, state.encoder.frozen() ? EncoderMode::eval : EncoderMode::train, &cache_);

  const auto n_cap = static_cast<std::size_t>(batch_.capacity);
  values_.resize(weights_.size());
  residuals_.resize(rays.size());
  const auto voxels = state.voxels.values();
  double sum_sq = 0.0;
  for (std::size_t b = 0; b < rays.size(); ++b) {
    auto v = std::span<double>(values_).subspan(b * n_cap, n_cap);
    auto w = std::span<const double>(weights_).subspan(b * n_cap, n_cap);
    voxel_pool(voxels, dataset.indices(rays[b]), dataset.length(rays[b]), v);
    const double r = predict_pixel(w, v) - dataset.target(rays[b]);
    residuals_[b] = r;
    sum_sq += r * r;
  }
  return sum_sq / static_cast<double>(rays.size());
}

double BatchRunner::loss(TrainState& state, const RayDataset& dataset, std::span<const std::size_t> rays) {
  return forward(state, dataset, rays);
}

double BatchRunner::gradients(TrainState& state, const RayDataset& dataset, std::span<const std::size_t> rays,
                              bool grad_norm, std::vector<double>& voxel_grad, std::vector<double>& encoder_grad) {
  const double loss = forward(state, dataset, rays);
  const auto n_cap = static_cast<std::size_t>(batch_.capacity);
  const double scale = 2.0 / static_cast<double>(rays.size());

  voxel_grad.assign(state.voxels.size(), 0.0);
  grad_w_.resize(weights_.size());
  grad_v_.resize(n_cap);
  for (std::size_t b = 0; b < rays.size(); ++b) {
    const double g = scale * residuals_[b];
    auto w = std::span<const double>(weights_).subspan(b * n_cap, n_cap);
    auto v = std::span<const double>(values_).subspan(b * n_cap, n_cap);
    gradnorm_backward(g, w, v, grad_norm, grad_v_, std::span<double>(grad_w_).subspan(b * n_cap, n_cap));
    const auto idx = dataset.indices(rays[b]);
    for (std::size_t j = 0; j < idx.size(); ++j) voxel_grad[idx[j]] += grad_v_[j];
  }
  encoder_grad = state.encoder.backward(cache_, grad_w_);
  return loss;
}

namespace {

double l2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

std::optional<double> similarity_to(const VoxelGrid& voxels, const VoxelGrid* truth) {
  if (!truth) return std::nullopt;
  try {
    return cosine_similarity(voxels, *truth);
  } catch (const MetricError&) {
    return std::nullopt;
  }
}

}  // namespace

void run_epochs(TrainState& state, const RayDataset& dataset, const TrainConfig& config,
                const VoxelGrid* ground_truth, const MetricCallback& on_record) {
  config.validate();
  if (dataset.empty()) throw ParameterError("training dataset is empty");
  if (dataset.grid().dims != state.voxels.dims()) throw ShapeError("dataset grid does not match the voxel grid");
  if (ground_truth && ground_truth->dims() != state.voxels.dims()) {
    throw ShapeError("ground truth grid does not match the voxel grid");
  }

  const auto start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  };
  auto emit = [&](MetricRecord record) {
    state.history.push_back(record);
    if (on_record) on_record(record);
  };

  const std::size_t per_step = static_cast<std::size_t>(config.rays_per_step());
  const std::size_t steps_per_epoch = (dataset.size() + per_step - 1) / per_step;
  std::vector<std::size_t> order(dataset.size());
  std::vector<double> voxel_grad;
  std::vector<double> encoder_grad;
  BatchRunner runner;

  const int last_epoch = state.epoch + config.epochs;
  for (; state.epoch < last_epoch; ++state.epoch) {
    const int epoch = state.epoch;
    const double lr_v = lr_schedule(epoch, config.lr_voxel, config.lr_decay, config.decay_period);
    const double lr_e = lr_schedule(epoch, config.lr_encoder, config.lr_decay, config.decay_period);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), state.rng);

    double epoch_sq = 0.0;
    for (std::size_t s = 0; s < steps_per_epoch; ++s) {
      const std::size_t begin = s * per_step;
      const std::size_t count = std::min(per_step, order.size() - begin);
      const auto rays = std::span<const std::size_t>(order).subspan(begin, count);
      const double loss = runner.gradients(state, dataset, rays, config.grad_norm, voxel_grad, encoder_grad);

      if (!std::isfinite(loss) || !all_finite(voxel_grad) || !all_finite(encoder_grad)) {
        std::ostringstream msg;
        msg << "non-finite loss or gradient at epoch " << epoch << ", step " << state.step << ": loss=" << loss
            << ", lr_voxel=" << lr_v << ", lr_encoder=" << lr_e << ", |g_voxel|=" << l2(voxel_grad)
            << ", |g_encoder|=" << l2(encoder_grad);
        throw TrainingError(msg.str());
      }

      if (!state.encoder.frozen()) state.encoder_adam.step(state.encoder.parameters(), encoder_grad, lr_e);
      state.voxel_adam.step(state.voxels.values(), voxel_grad, lr_v);
      if (config.clamp_voxels) {
        for (double& v : state.voxels.values()) v = std::max(v, 0.0);
      }
      ++state.step;
      epoch_sq += loss * static_cast<double>(count);

      if (config.log_first_epoch_steps && epoch == 0) {
        MetricRecord r;
        r.epoch = static_cast<double>(s + 1) / static_cast<double>(steps_per_epoch);
        r.step = state.step;
        r.loss = loss;
        r.cosine_similarity = similarity_to(state.voxels, ground_truth);
        r.lr_voxel = lr_v;
        r.lr_encoder = lr_e;
        r.wall_ms = elapsed_ms();
        r.per_step = true;
        emit(r);
      }
    }

    MetricRecord r;
    r.epoch = static_cast<double>(epoch + 1);
    r.step = state.step;
    r.loss = epoch_sq / static_cast<double>(dataset.size());
    r.cosine_similarity = similarity_to(state.voxels, ground_truth);
    r.lr_voxel = lr_v;
    r.lr_encoder = lr_e;
    r.wall_ms = elapsed_ms();
    emit(r);
  }
}

TrainState train(const RayDataset& dataset, const TrainConfig& config, std::uint64_t seed,
                 const VoxelGrid* ground_truth, const MetricCallback& on_record) {
  if (dataset.empty()) throw ParameterError("training dataset is empty");
  TrainState state = init_state(dataset.grid(), config, seed);
  run_epochs(state, dataset, config, ground_truth, on_record);
  return state;
}

TrainState transfer_train(const WeightEncoder& encoder, const RayDataset& dataset, const TrainConfig& config,
                          std::uint64_t seed, const VoxelGrid* ground_truth, const MetricCallback& on_record) {
  if (dataset.empty()) throw ParameterError("training dataset is empty");
  TrainConfig cfg = config;
  cfg.encoder = encoder.spec();
  TrainState state = init_state(dataset.grid(), cfg, seed);
  state.encoder = encoder;
  state.encoder.set_frozen(true);
  state.encoder_adam = Adam(0, cfg.adam);
  run_epochs(state, dataset, cfg, ground_truth, on_record);
  return state;
}

void write_metrics_csv(const std::vector<MetricRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "epoch,step,loss,cosine_similarity,lr_voxel,lr_encoder,wall_ms\n";
  out << std::setprecision(17);
  for (const auto& r : records) {
    out << r.epoch << ',' << r.step << ',' << r.loss << ',';
    if (r.cosine_similarity) out << *r.cosine_similarity;
    out << ',' << r.lr_voxel << ',' << r.lr_encoder << ',' << std::setprecision(6) << r.wall_ms
        << std::setprecision(17) << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace wernet
