#include <benchmark/benchmark.h>

#include <numeric>
#include <random>
#include <vector>

#include "wernet/camera.hpp"
#include "wernet/dataset.hpp"
#include "wernet/encoder.hpp"
#include "wernet/nn_ops.hpp"
#include "wernet/phantoms.hpp"
#include "wernet/projector.hpp"
#include "wernet/trainer.hpp"
#include "wernet/traversal.hpp"

using namespace wernet;

namespace {

// Desk-scale jet case shared by the dataset-level benchmarks.
struct Desk {
  VoxelGrid truth;
  std::vector<CameraPose> layout;
  RayDataset dataset;

  Desk() : truth(make_jet_flame({16, 64, 16}, 0.5)) {
    LayoutSpec spec;
    spec.n_views = 12;
    spec.view_angle_step_deg = 15.0;
    spec.rows = 64;
    spec.cols = 256;
    layout = build_layout(spec, truth.geometry());
    std::vector<Image> images;
    for (std::size_t v = 0; v < layout.size(); ++v) images.push_back(forward_project(truth, layout[v], static_cast<int>(v)));
    dataset = build_dataset(truth.geometry(), layout, images);
  }
};

const Desk& desk() {
  static const Desk d;
  return d;
}

}  // namespace

static void BM_TraceRay(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  const auto grid = GridGeometry::centered({n, n, n}, 0.5);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Ray> rays;
  for (int i = 0; i < 256; ++i) {
    const Vec3 d = normalized(Vec3{g(rng), g(rng), g(rng)});
    rays.push_back({grid.center() - d * (2.0 * grid.bounding_sphere_diameter()), d});
  }
  std::size_t i = 0;
  for (auto _ : state) {
    auto seq = trace_impacting_voxels(rays[i++ % rays.size()], grid);
    benchmark::DoNotOptimize(seq.hits.data());
  }
}
BENCHMARK(BM_TraceRay)->Arg(16)->Arg(32)->Arg(64);

static void BM_ForwardProjectView(benchmark::State& state) {
  const auto& d = desk();
  for (auto _ : state) {
    auto img = forward_project(d.truth, d.layout[0], 0);
    benchmark::DoNotOptimize(img.pixels.data());
  }
  state.SetItemsProcessed(state.iterations() * d.layout[0].rows * d.layout[0].cols);
}
BENCHMARK(BM_ForwardProjectView)->Unit(benchmark::kMillisecond);

static void BM_ConvBatched(benchmark::State& state) {
  const int cin = static_cast<int>(state.range(0));
  const int cout = 32, batch = 100, length = 32;
  std::vector<double> w(static_cast<std::size_t>(cout) * cin * kConvWidth, 0.01);
  std::vector<double> in(static_cast<std::size_t>(cin) * batch * length, 1.0);
  std::vector<double> out(static_cast<std::size_t>(cout) * batch * length);
  const Conv1dView conv{cin, cout, w, {}};
  ConvScratch scratch;
  for (auto _ : state) {
    conv1d_forward_batched(conv, batch, length, in, out, scratch);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_ConvBatched)->Arg(6)->Arg(32);

static void BM_EncoderForwardBackward(benchmark::State& state) {
  const auto& d = desk();
  EncoderSpec spec;
  spec.variant = static_cast<EncoderVariant>(state.range(0));
  WeightEncoder enc(spec);
  std::mt19937_64 rng(2);
  enc.initialize(rng);
  std::vector<std::size_t> rays(100);
  std::iota(rays.begin(), rays.end(), std::size_t{0});
  EncoderBatch batch;
  EncoderBatch::gather(d.dataset, rays, batch);
  EncoderCache cache;
  std::vector<double> upstream(static_cast<std::size_t>(batch.batch) * batch.capacity, 1.0);
  for (auto _ : state) {
    auto w = enc.forward(batch, EncoderMode::train, &cache);
    auto g = enc.backward(cache, upstream);
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(BM_EncoderForwardBackward)->DenseRange(0, 2);

static void BM_TrainStep(benchmark::State& state) {
  const auto& d = desk();
  TrainConfig cfg;
  cfg.batch_samples = 1;
  cfg.rays_per_sample = static_cast<int>(state.range(0));
  TrainState ts = init_state(d.truth.geometry(), cfg, 3);
  std::vector<std::size_t> rays(static_cast<std::size_t>(cfg.rays_per_step()));
  std::iota(rays.begin(), rays.end(), std::size_t{0});
  BatchRunner runner;
  std::vector<double> gv, ge;
  for (auto _ : state) {
    runner.gradients(ts, d.dataset, rays, true, gv, ge);
    ts.encoder_adam.step(ts.encoder.parameters(), ge, cfg.lr_encoder);
    ts.voxel_adam.step(ts.voxels.values(), gv, cfg.lr_voxel);
  }
  state.SetItemsProcessed(state.iterations() * cfg.rays_per_step());
}
BENCHMARK(BM_TrainStep)->Arg(100)->Arg(3200)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
