// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only when all pass.
//
//   wernet_acceptance [--only 1,4,11]
//
// Desk scale: 16 x 64 x 16 voxels of 0.5 mm, 12 views 15 degrees apart, 64 x 256 detector.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "micro_case.hpp"
#include "oracles.hpp"
#include "wernet/art.hpp"
#include "wernet/checkpoint.hpp"
#include "wernet/config.hpp"
#include "wernet/dataset.hpp"
#include "wernet/experiment.hpp"
#include "wernet/grid_io.hpp"
#include "wernet/image.hpp"
#include "wernet/metrics.hpp"
#include "wernet/phantoms.hpp"
#include "wernet/ray_model.hpp"
#include "wernet/seeding.hpp"
#include "wernet/trainer.hpp"
#include "wernet/traversal.hpp"

namespace fs = std::filesystem;
using namespace wernet;

namespace {

constexpr std::uint64_t kDeskSeed = 20240611;

// Thresholds.
constexpr double kChordRelTol = 1e-9;
constexpr double kVoxelLengthTol = 1e-3;  // x voxel size
constexpr double kGradRelTol = 1e-4;
constexpr double kFdStep = 1e-4;
constexpr double kArtMinSimilarity = 0.995;
constexpr double kWernetMinSimilarity = 0.99;
constexpr int kMaxEpochs = 200;
constexpr double kGradNormGap = 0.05;
constexpr double kNoiseGap = 0.03;
constexpr double kTransferMinSimilarity = 0.95;
constexpr double kTransferReach = 0.9;
constexpr double kArrangementSpread = 0.05;

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

void progress(const std::string& line) { std::fprintf(stderr, "  %s\n", line.c_str()); }

// ---------------------------------------------------------------------------------------------
// Desk-scale cases

TrainConfig desk_training() {
  TrainConfig t;
  t.lr_voxel = 0.005;
  t.lr_encoder = 5e-4;
  t.lr_decay = 0.5;
  t.decay_period = 50;
  t.epochs = kMaxEpochs;
  t.batch_samples = 1;
  t.rays_per_sample = 100;
  t.encoder.variant = EncoderVariant::no_bias_bn;
  t.grad_norm = true;
  t.log_first_epoch_steps = true;
  return t;
}

ExperimentConfig desk_case(PhantomKind kind) {
  ExperimentConfig c;
  c.name = "desk";
  c.seed = kDeskSeed;
  c.phantom.kind = kind;
  c.phantom.dims = {16, 64, 16};
  c.phantom.voxel_size_mm = 0.5;
  c.layout.n_views = 12;
  c.layout.view_angle_step_deg = 15.0;
  c.layout.rows = 64;
  c.layout.cols = 256;
  c.art.enabled = true;
  c.art.config.relaxation = 0.2;
  c.art.config.sweeps = 50;
  c.wernet.config = desk_training();
  return c;
}

struct Prepared {
  Scene scene;
  RayDataset dataset;
};

Prepared prepare(const ExperimentConfig& config) {
  Prepared p{build_scene(config, 0), RayDataset{}};
  DatasetOptions opts;
  opts.include_zero_pixels = config.include_zero_pixels;
  opts.seed = derive_seed(config.seed, "dataset");
  p.dataset = build_dataset(p.scene.truth.geometry(), p.scene.layout, p.scene.images, opts);
  return p;
}

MetricCallback epoch_logger(const std::string& tag) {
  return [tag](const MetricRecord& r) {
    if (r.per_step) return;
    const int e = static_cast<int>(r.epoch);
    if (e % 10 == 0 || e == 1) {
      progress(tag + " epoch " + std::to_string(e) + " S_C " + fmt(r.cosine_similarity.value_or(-1.0), 8) +
               " loss " + fmt(r.loss, 4));
    }
  };
}

TrainState train_case(const Prepared& p, const ExperimentConfig& config, const TrainConfig& tc, const std::string& tag) {
  const auto t0 = Clock::now();
  TrainState s = train(p.dataset, tc, derive_seed(config.seed, "wernet"), &p.scene.truth, epoch_logger(tag));
  progress(tag + " done in " + fmt(seconds_since(t0), 4) + " s, S_C " + fmt(s.final_similarity().value_or(-1.0), 8));
  return s;
}

double final_similarity(const TrainState& s) { return s.final_similarity().value_or(-1.0); }

double art_similarity(const Prepared& p, const ExperimentConfig& config) {
  ArtConfig ac = config.art.config;
  ac.seed = derive_seed(config.seed, "art");
  const auto result = art_reconstruct(p.scene.images, p.scene.layout, p.scene.truth.geometry(), ac, &p.scene.truth);
  return cosine_similarity(result.grid, p.scene.truth);
}

/// Runs shared by several criteria are computed once.
class Cache {
 public:
  const Prepared& jet() { return lazy(jet_, [] { return prepare(desk_case(PhantomKind::jet)); }); }
  const Prepared& turbulent() { return lazy(turb_, [] { return prepare(desk_case(PhantomKind::turbulent)); }); }

  const TrainState& jet_scratch() {
    if (!jet_run_) jet_run_ = train_case(jet(), desk_case(PhantomKind::jet), desk_training(), "jet/no_bias_bn");
    return *jet_run_;
  }
  const TrainState& turbulent_scratch() {
    if (!turb_run_) turb_run_ = train_case(turbulent(), desk_case(PhantomKind::turbulent), desk_training(), "turbulent/12");
    return *turb_run_;
  }

 private:
  template <class F>
  const Prepared& lazy(std::optional<Prepared>& slot, F make) {
    if (!slot) slot = make();
    return *slot;
  }
  std::optional<Prepared> jet_, turb_;
  std::optional<TrainState> jet_run_, turb_run_;
};

// ---------------------------------------------------------------------------------------------
// Criteria

Verdict traversal_oracle(Cache&) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(kDeskSeed);
  std::uniform_int_distribution<int> dim(1, 32);
  std::uniform_real_distribution<double> size(0.1, 2.0);
  double worst_chord = 0.0, worst_voxel = 0.0;
  int hits = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto g = GridGeometry::centered({dim(rng), dim(rng), dim(rng)}, size(rng));
    const double d = g.bounding_sphere_diameter();
    const Vec3 from = oracle::random_on_sphere(rng, g.center(), 1.5 * d);
    Vec3 to;
    for (int a = 0; a < 3; ++a) {
      to[a] = std::uniform_real_distribution<double>(g.origin[a], g.max_corner()[a])(rng);
    }
    const Ray ray{from, normalized(to - from)};
    const auto seq = trace_impacting_voxels(ray, g);
    const auto [t_in, t_out] = oracle::box_chord(ray, g);
    const double chord = t_out - t_in;
    double total = 0.0;
    std::map<std::size_t, double> got;
    for (const auto& h : seq.hits) {
      total += h.length;
      got[g.flat_index(h.voxel)] += h.length;
    }
    if (chord > 0.0) {
      ++hits;
      worst_chord = std::max(worst_chord, std::abs(total - chord) / chord);
    } else {
      worst_chord = std::max(worst_chord, total);  // a miss must produce nothing
    }
    auto sampled = oracle::sampled_lengths(ray, g, 100000);
    for (const auto& [voxel, len] : got) sampled.emplace(voxel, 0.0);
    for (const auto& [voxel, len] : sampled) {
      const auto it = got.find(voxel);
      const double mine = it == got.end() ? 0.0 : it->second;
      worst_voxel = std::max(worst_voxel, std::abs(mine - len) / g.voxel_size);
    }
  }
  const double secs = seconds_since(t0);
  const bool pass = worst_chord <= kChordRelTol && worst_voxel <= kVoxelLengthTol && secs < 30.0;
  return {pass, "1000 rays (" + std::to_string(hits) + " hit), max chord rel err " + fmt(worst_chord, 3) +
                    ", max per-voxel err " + fmt(worst_voxel, 3) + " voxel, " + fmt(secs, 3) + " s"};
}

Verdict gradient_oracle(Cache&) {
  const auto t0 = Clock::now();
  const VoxelGrid truth = make_jet_flame({8, 8, 8}, 1.0);
  const RayDataset ds = micro::dataset_from_rays(truth, micro::two_rays());
  if (ds.size() != 2) return {false, "micro-case does not produce two rays"};
  const std::vector<std::size_t> rays{0, 1};
  double worst = 0.0;
  bool identity = true;
  int checked = 0, at_kink = 0;
  for (auto variant : {EncoderVariant::no_bias, EncoderVariant::bias_mask, EncoderVariant::no_bias_bn}) {
    TrainConfig cfg;
    cfg.encoder.variant = variant;
    TrainState state = init_state(truth.geometry(), cfg, kDeskSeed);
    BatchRunner runner;
    std::vector<double> gv, ge;
    runner.gradients(state, ds, rays, false, gv, ge);
    auto loss = [&] { return runner.loss(state, ds, rays); };
    for (std::size_t j = 0; j < state.voxels.size(); ++j) {
      const double fd = oracle::central_difference(loss, state.voxels[j], kFdStep);
      worst = std::max(worst, oracle::relative_error(gv[j], fd, 1e-9));
    }
    // Central differences only estimate a derivative when no leaky ReLU changes sides within +-h.
    EncoderBatch probe;
    EncoderBatch::gather(ds, rays, probe);
    auto pattern = [&] {
      EncoderCache c;
      state.encoder.forward(probe, EncoderMode::train, &c);
      std::vector<bool> signs;
      for (const auto& layer : c.activations)
        for (double a : layer) signs.push_back(a >= 0.0);
      return signs;
    };
    const auto base = pattern();
    auto params = state.encoder.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double saved = params[i];
      params[i] = saved + kFdStep;
      const bool up_same = pattern() == base;
      params[i] = saved - kFdStep;
      const bool down_same = pattern() == base;
      params[i] = saved;
      if (!up_same || !down_same) {
        ++at_kink;
        continue;
      }
      const double fd = oracle::central_difference(loss, params[i], kFdStep);
      worst = std::max(worst, oracle::relative_error(ge[i], fd, 1e-9));
      ++checked;
    }

    std::vector<double> gv_on, ge_on;
    runner.gradients(state, ds, rays, false, gv, ge);
    runner.gradients(state, ds, rays, true, gv_on, ge_on);
    identity = identity && ge_on == ge;
    EncoderBatch batch;
    EncoderBatch::gather(ds, rays, batch);
    const auto w = state.encoder.forward(batch, EncoderMode::train);
    const auto n = static_cast<std::size_t>(batch.capacity);
    for (std::size_t b = 0; b < rays.size(); ++b) {
      double sq = 0.0;
      for (std::size_t t = 0; t < n; ++t) sq += w[b * n + t] * w[b * n + t];
      const double denom = std::max(std::sqrt(sq), 1e-12);
      // The two rays are disjoint, so each voxel gradient comes from one ray.
      for (auto j : ds.indices(rays[b])) identity = identity && gv_on[j] == gv[j] / denom;
    }
  }
  const double secs = seconds_since(t0);
  const bool pass = worst < kGradRelTol && identity && secs < 60.0;
  return {pass, "max FD rel err " + fmt(worst, 3) + " over 3 variants (" + std::to_string(checked) +
                    " encoder parameters, " + std::to_string(at_kink) + " within h of a leaky-ReLU kink skipped)" +
                    ", normalization identity " +
                    (identity ? "exact" : "VIOLATED") + ", " + fmt(secs, 3) + " s"};
}

Verdict gradnorm_examples(Cache&) {
  const auto a = gradnorm_backward(1.0, std::vector<double>{2.0}, std::vector<double>{3.0}, true);
  const auto b = gradnorm_backward(1.0, std::vector<double>{3.0, 4.0}, std::vector<double>{1.0, 1.0}, true);
  const bool pass = a.grad_v == std::vector<double>{1.0} && a.grad_w == std::vector<double>{3.0} &&
                    b.grad_v == std::vector<double>{0.6, 0.8} && b.grad_w == std::vector<double>{1.0, 1.0};
  return {pass, "(2),(3) -> g_v " + fmt(a.grad_v[0], 17) + ", g_w " + fmt(a.grad_w[0], 17) + "; (3,4),(1,1) -> g_v (" +
                    fmt(b.grad_v[0], 17) + ", " + fmt(b.grad_v[1], 17) + "), g_w (" + fmt(b.grad_w[0], 17) + ", " +
                    fmt(b.grad_w[1], 17) + ")"};
}

Verdict art_convergence(Cache& cache) {
  const auto& jet = cache.jet();
  const auto t0 = Clock::now();
  const double s = art_similarity(jet, desk_case(PhantomKind::jet));
  const double secs = seconds_since(t0);
  return {s >= kArtMinSimilarity && secs < 300.0, "S_C " + fmt(s, 8) + " after 50 sweeps, " + fmt(secs, 3) + " s"};
}

Verdict wernet_desk(Cache& cache) {
  const auto t0 = Clock::now();
  const auto& run = cache.jet_scratch();
  const double secs = seconds_since(t0);
  const auto rows = run.epoch_history();
  std::vector<double> windows;
  for (std::size_t start = 0; start + 10 <= rows.size(); start += 10) {
    double sum = 0.0;
    for (std::size_t i = start; i < start + 10; ++i) sum += rows[i].cosine_distance().value_or(1.0);
    windows.push_back(sum / 10.0);
  }
  bool decreasing = windows.size() >= 2;
  std::size_t first_violation = 0;
  for (std::size_t i = 1; i < windows.size(); ++i) {
    if (!(windows[i] < windows[i - 1])) {
      decreasing = false;
      if (!first_violation) first_violation = i;
    }
  }
  const double s = final_similarity(run);
  const bool pass = s >= kWernetMinSimilarity && decreasing && static_cast<int>(rows.size()) <= kMaxEpochs &&
                    secs < 1800.0;
  std::string detail = "S_C " + fmt(s, 8) + " after " + std::to_string(rows.size()) + " epochs, windowed D_C " +
                       (decreasing ? "strictly decreasing" : "not monotone (window " + std::to_string(first_violation) + ")") +
                       ", " + fmt(secs, 4) + " s";
  return {pass, detail};
}

Verdict gradnorm_ablation(Cache& cache) {
  const double on = final_similarity(cache.jet_scratch());
  TrainConfig tc = desk_training();
  tc.grad_norm = false;
  const double off = final_similarity(train_case(cache.jet(), desk_case(PhantomKind::jet), tc, "jet/grad-norm off"));
  return {on - off >= kGradNormGap, "on " + fmt(on, 8) + ", off " + fmt(off, 8) + ", gap " + fmt(on - off, 4) +
                                        " at " + std::to_string(kMaxEpochs) + " epochs"};
}

Verdict encoder_ablation(Cache& cache) {
  const double bn = final_similarity(cache.jet_scratch());
  TrainConfig tc = desk_training();
  tc.encoder.variant = EncoderVariant::bias_mask;
  const double mask = final_similarity(train_case(cache.jet(), desk_case(PhantomKind::jet), tc, "jet/bias_mask"));
  tc.encoder.variant = EncoderVariant::no_bias;
  const double plain = final_similarity(train_case(cache.jet(), desk_case(PhantomKind::jet), tc, "jet/no_bias"));
  const bool pass = bn >= kWernetMinSimilarity && mask >= kWernetMinSimilarity && plain < bn && plain < mask;
  return {pass, "no_bias_bn " + fmt(bn, 8) + ", bias_mask " + fmt(mask, 8) + ", no_bias " + fmt(plain, 8)};
}

Verdict noise_study(Cache&) {
  ExperimentConfig cfg = desk_case(PhantomKind::turbulent);
  cfg.noise.fraction = 0.10;
  const Prepared noisy = prepare(cfg);
  const double art = art_similarity(noisy, cfg);
  progress("turbulent/noisy ART S_C " + fmt(art, 8));
  const double net = final_similarity(train_case(noisy, cfg, desk_training(), "turbulent/noisy"));
  return {net - art >= kNoiseGap, "WERNet " + fmt(net, 8) + ", ART " + fmt(art, 8) + ", gap " + fmt(net - art, 4)};
}

Verdict transfer(Cache& cache) {
  const ExperimentConfig source_cfg = desk_case(PhantomKind::homogeneous);
  const Prepared source = prepare(source_cfg);
  const TrainState trained = train_case(source, source_cfg, desk_training(), "homogeneous/source");

  // Freeze through a WEN1 round trip, as a saved checkpoint would be.
  const WeightEncoder encoder = decode_checkpoint(encode_checkpoint({trained.encoder, {}})).encoder;

  struct Target {
    const char* name;
    PhantomKind kind;
    const Prepared* data;
    const TrainState* scratch;
  };
  const Target targets[] = {{"jet", PhantomKind::jet, &cache.jet(), &cache.jet_scratch()},
                            {"turbulent", PhantomKind::turbulent, &cache.turbulent(), &cache.turbulent_scratch()}};
  bool pass = true;
  std::string detail;
  for (const auto& t : targets) {
    const ExperimentConfig cfg = desk_case(t.kind);
    const TrainState moved = transfer_train(encoder, t.data->dataset, desk_training(), derive_seed(cfg.seed, "wernet"),
                                            &t.data->scene.truth, epoch_logger(std::string(t.name) + "/transfer"));
    const double s = final_similarity(moved);
    const auto reach = epochs_to_reach(moved.history, kTransferReach);
    const auto scratch_reach = epochs_to_reach(t.scratch->history, kTransferReach);
    // Scratch runs that never reach the threshold need more than the whole budget.
    const double budget = scratch_reach ? *scratch_reach : std::numeric_limits<double>::infinity();
    const bool ok = s >= kTransferMinSimilarity && reach && *reach <= 0.5 * budget;
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += std::string(t.name) + " S_C " + fmt(s, 8) + ", reaches 0.9 at epoch " +
              (reach ? fmt(*reach, 4) : std::string("never")) + " vs scratch " +
              (scratch_reach ? fmt(*scratch_reach, 4) : std::string("never"));
  }
  return {pass, detail};
}

Verdict view_count(Cache& cache) {
  const double twelve = final_similarity(cache.turbulent_scratch());
  std::vector<double> four;
  std::string detail = "12 views " + fmt(twelve, 8) + "; 4 views";
  for (double step : {45.0, 75.0, 105.0}) {
    ExperimentConfig cfg = desk_case(PhantomKind::turbulent);
    cfg.layout.n_views = 4;
    cfg.layout.view_angle_step_deg = step;
    const Prepared p = prepare(cfg);
    four.push_back(final_similarity(train_case(p, cfg, desk_training(), "turbulent/4@" + fmt(step, 3))));
    detail += " step " + fmt(step, 3) + ": " + fmt(four.back(), 8);
  }
  const auto [lo, hi] = std::minmax_element(four.begin(), four.end());
  const bool pass = twelve > *hi && *hi - *lo < kArrangementSpread;
  return {pass, detail + ", spread " + fmt(*hi - *lo, 4)};
}

Verdict determinism_and_formats(Cache&) {
  // Rerun of a complete (short) experiment through the runner.
  nlohmann::json doc = to_json(desk_case(PhantomKind::turbulent));
  doc["wernet"]["epochs"] = 3;
  doc["noise"]["fraction"] = 0.05;
  const auto base = fs::temp_directory_path() / ("wernet_acceptance_" + std::to_string(std::random_device{}()));
  std::vector<double> finals;
  std::vector<std::string> grids;
  for (int rep = 0; rep < 2; ++rep) {
    RunOptions opts;
    opts.out_dir = base / std::to_string(rep);
    const auto out = run_experiment(doc, opts);
    finals.push_back(out.at(0).manifest.at("metrics").at("wernet").at("S_C").get<double>());
    grids.push_back(file_checksum(opts.out_dir / "wernet.vxg") + file_checksum(opts.out_dir / "art.vxg"));
  }
  std::error_code ec;
  fs::remove_all(base, ec);
  const bool rerun = finals[0] == finals[1] && grids[0] == grids[1];

  std::mt19937_64 rng(kDeskSeed);
  std::uniform_int_distribution<int> dim(1, 12);
  std::uniform_real_distribution<double> value(-5.0, 5.0);
  int round_trips = 0;
  bool formats = true;
  for (int trial = 0; trial < 50; ++trial) {
    VoxelGrid grid(GridGeometry::centered({dim(rng), dim(rng), dim(rng)}, 0.25 + trial * 0.01));
    for (auto& v : grid.values()) v = static_cast<float>(value(rng));
    const auto bytes = encode_grid(grid);
    const VoxelGrid back = decode_grid(bytes);
    formats = formats && back == grid && encode_grid(back) == bytes;

    Image img(trial, dim(rng), dim(rng));
    for (auto& p : img.pixels) p = static_cast<float>(value(rng));
    const auto ib = encode_image(img);
    const Image ib_back = decode_image(ib);
    formats = formats && ib_back.pixels == img.pixels && ib_back.rows == img.rows && ib_back.cols == img.cols &&
              ib_back.view_id == img.view_id && encode_image(ib_back) == ib;

    EncoderSpec spec;
    spec.variant = static_cast<EncoderVariant>(trial % 3);
    spec.hidden_channels = 1 + trial % 9;
    spec.depth = 2 + trial % 2;
    WeightEncoder enc(spec);
    enc.initialize(rng);
    for (auto& m : enc.running_mean()) m = value(rng);
    round_to_float32(enc);
    const EncoderCheckpoint ckpt{enc, {{"trial", trial}}};
    const auto cb = encode_checkpoint(ckpt);
    const auto cb_back = decode_checkpoint(cb);
    formats = formats && cb_back.encoder == enc && cb_back.provenance == ckpt.provenance && encode_checkpoint(cb_back) == cb;
    round_trips += 3;
  }
  return {rerun && formats, std::string("rerun S_C ") + fmt(finals[0], 17) + " vs " + fmt(finals[1], 17) +
                                (rerun ? " (bit-identical)" : " (DIFFERENT)") + "; " + std::to_string(round_trips) +
                                " VXG/IMG1/WEN1 round trips " + (formats ? "bit-exact" : "FAILED")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict(Cache&)> run;
};

std::set<int> parse_only(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) != "--only" || i + 1 >= argc) continue;
    std::stringstream ss(argv[++i]);
    std::string item;
    while (std::getline(ss, item, ',')) only.insert(std::stoi(item));
  }
  return only;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "traversal oracle", traversal_oracle},
      {2, "gradient oracle", gradient_oracle},
      {3, "gradient normalization examples", gradnorm_examples},
      {4, "ART noiseless convergence", art_convergence},
      {5, "WERNet desk-scale reconstruction", wernet_desk},
      {6, "gradient normalization ablation", gradnorm_ablation},
      {7, "encoder variant ordering", encoder_ablation},
      {8, "noise study", noise_study},
      {9, "frozen-encoder transfer", transfer},
      {10, "view-count sensitivity", view_count},
      {11, "determinism and formats", determinism_and_formats},
  };
  std::set<int> only;
  try {
    only = parse_only(argc, argv);
  } catch (const std::exception&) {
    std::fprintf(stderr, "usage: wernet_acceptance [--only 1,2,...]\n");
    return 2;
  }

  Cache cache;
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    std::fprintf(stderr, "[%d] %s\n", c.id, c.name);
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = c.run(cache);
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::printf("%s [%d] %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
