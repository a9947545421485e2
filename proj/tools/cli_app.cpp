#include "cli_app.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wernet/art.hpp"
#include "wernet/checkpoint.hpp"
#include "wernet/config.hpp"
#include "wernet/dataset.hpp"
#include "wernet/errors.hpp"
#include "wernet/experiment.hpp"
#include "wernet/grid_io.hpp"
#include "wernet/metrics.hpp"
#include "wernet/parallel.hpp"
#include "wernet/projector.hpp"
#include "wernet/seeding.hpp"
#include "wernet/slices.hpp"
#include "wernet/trainer.hpp"

namespace wernet::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  int threads = 0;
  std::string run;
  bool quiet = false;
};

json load_document(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("config file not found: " + path);
  try {
    return read_json_file(path);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

/// The selected run of a config file (first run when --run is empty), with --seed / --threads applied.
ExperimentConfig load_config(const Globals& g) {
  if (g.config.empty()) throw UsageError("--config is required");
  const json doc = load_document(g.config);
  try {
    const auto runs = expand_runs(doc);
    const auto* chosen = &runs.front();
    if (!g.run.empty()) {
      chosen = nullptr;
      for (const auto& r : runs) {
        if (r.first == g.run) chosen = &r;
      }
      if (!chosen) throw UsageError("no run named \"" + g.run + "\" in " + g.config);
    }
    ExperimentConfig cfg = parse_experiment_config(chosen->second);
    cfg.name = chosen->first;
    if (g.seed) cfg.seed = *g.seed;
    if (g.threads > 0) cfg.threads = g.threads;
    return cfg;
  } catch (const ParameterError& e) {
    throw UsageError(g.config + ": " + e.what());
  }
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string("--") + what + " is required");
  if (!fs::exists(path)) throw UsageError(std::string(what) + " not found: " + path);
}

std::vector<CameraPose> load_layout(const std::string& path) {
  require_file(path, "layout");
  const json j = read_json_file(path);
  const json& poses = j.is_object() ? j.at("poses") : j;
  return poses.get<std::vector<CameraPose>>();
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

/// Images, poses and reference grid either from files or generated from the config.
struct Inputs {
  VoxelGrid reference;
  std::vector<CameraPose> layout;
  std::vector<Image> images;
  std::uint64_t seed = 0;
};

struct InputPaths {
  std::string images;
  std::string layout;
  std::string reference;
};

Inputs resolve_inputs(const Globals& g, const InputPaths& paths, const std::optional<ExperimentConfig>& cfg) {
  Inputs in;
  if (!paths.images.empty()) {
    require_file(paths.reference, "reference");
    in.reference = load_grid(paths.reference);
    in.layout = load_layout(paths.layout);
    if (!fs::is_directory(paths.images)) throw UsageError("image directory not found: " + paths.images);
    in.images = load_images(paths.images);
    in.seed = g.seed.value_or(cfg ? cfg->seed : 0);
    return in;
  }
  if (!cfg) throw UsageError("give --images/--layout/--reference or --config");
  Scene scene = build_scene(*cfg, resolve_threads(cfg->threads));
  in.reference = std::move(scene.truth);
  in.layout = std::move(scene.layout);
  in.images = std::move(scene.images);
  in.seed = cfg->seed;
  return in;
}

void add_input_options(CLI::App* cmd, InputPaths& p) {
  cmd->add_option("--images", p.images, "directory of IMG1 views (view_000.img, ...)");
  cmd->add_option("--layout", p.layout, "layout.json with the camera poses");
  cmd->add_option("--reference", p.reference, "grid supplying the geometry and the S_C reference");
}

std::function<void(const MetricRecord&)> epoch_printer(std::ostream& err, bool quiet) {
  if (quiet) return {};
  return [&err](const MetricRecord& r) {
    if (r.per_step) return;
    err << "epoch " << r.epoch << " loss " << std::setprecision(6) << r.loss;
    if (r.cosine_similarity) err << " S_C " << std::setprecision(8) << *r.cosine_similarity;
    err << "\n";
  };
}

json similarity(const VoxelGrid& a, const VoxelGrid& b) {
  const double s = cosine_similarity(a, b);
  return {{"S_C", s}, {"D_C", cosine_distance(s)}};
}

std::vector<int> parse_positions(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad slice position \"" + item + "\"");
    }
  }
  if (out.empty()) throw UsageError("--positions is empty");
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"WERNet and ART emission-tomography toolkit", "wernet"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "master seed (overrides the config)");
  app.add_option("--config", g.config, "experiment config JSON");
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads for projection/tracing (0 = all cores)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--run", g.run, "run name inside a multi-run config");
  app.add_flag("--quiet", g.quiet, "suppress progress output");

  // phantom
  auto* phantom_cmd = app.add_subcommand("phantom", "generate a phantom grid (phantom.vxg)");
  std::string kind;
  std::vector<int> dims;
  double voxel_size = 0.0;
  phantom_cmd->add_option("--kind", kind, "jet | turbulent | homogeneous");
  phantom_cmd->add_option("--dims", dims, "nx ny nz")->expected(3);
  phantom_cmd->add_option("--voxel-size", voxel_size, "voxel edge in mm")->check(CLI::PositiveNumber);

  // layout
  auto* layout_cmd = app.add_subcommand("layout", "build camera poses (layout.json)");
  std::string layout_grid;
  std::optional<int> views;
  std::optional<double> step, pitch;
  layout_cmd->add_option("--grid", layout_grid, "grid providing the geometry");
  layout_cmd->add_option("--views", views, "number of views");
  layout_cmd->add_option("--step", step, "view angle step in degrees");
  layout_cmd->add_option("--pitch", pitch, "pitch angle in degrees");

  // project
  auto* project_cmd = app.add_subcommand("project", "forward-project a grid (one IMG1 per pose)");
  std::string project_grid, project_layout;
  project_cmd->add_option("--grid", project_grid, "grid to project")->required();
  project_cmd->add_option("--layout", project_layout, "layout.json")->required();

  // noise
  auto* noise_cmd = app.add_subcommand("noise", "add Gaussian noise to a directory of images");
  std::string noise_images;
  double noise_fraction = 0.1;
  bool noise_clamp = false;
  noise_cmd->add_option("--images", noise_images, "input image directory")->required();
  noise_cmd->add_option("--fraction", noise_fraction, "sigma as a fraction of each image's maximum")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  noise_cmd->add_flag("--clamp", noise_clamp, "clamp noisy pixels at zero");

  // art
  auto* art_cmd = app.add_subcommand("art", "ART reconstruction (art.vxg, art_history.csv)");
  InputPaths art_in;
  add_input_options(art_cmd, art_in);
  std::optional<int> art_sweeps;
  std::optional<double> art_relaxation;
  art_cmd->add_option("--sweeps", art_sweeps, "number of sweeps");
  art_cmd->add_option("--relaxation", art_relaxation, "relaxation factor lambda");

  // train / transfer
  auto* train_cmd = app.add_subcommand("train", "WERNet training (wernet.vxg, encoder.wen, metrics.csv)");
  auto* transfer_cmd = app.add_subcommand("transfer", "voxel-only training with a frozen encoder");
  InputPaths train_in;
  std::optional<int> epochs;
  std::string variant;
  std::string grad_norm;
  std::string encoder_path;
  for (auto* cmd : {train_cmd, transfer_cmd}) {
    add_input_options(cmd, train_in);
    cmd->add_option("--epochs", epochs, "training epochs");
    cmd->add_option("--grad-norm", grad_norm, "on | off")->check(CLI::IsMember({"on", "off"}));
  }
  train_cmd->add_option("--variant", variant, "no_bias | bias_mask | no_bias_bn");
  transfer_cmd->add_option("--encoder", encoder_path, "WEN1 checkpoint")->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "cosine similarity of two grids, printed as JSON");
  std::string eval_a, eval_b;
  eval_cmd->add_option("--a", eval_a, "reconstruction")->required();
  eval_cmd->add_option("--b", eval_b, "reference")->required();

  // slices
  auto* slices_cmd = app.add_subcommand("slices", "export cross-section PGMs");
  std::string slice_grid, slice_reference, slice_axis = "y", slice_positions;
  slices_cmd->add_option("--grid", slice_grid, "grid to slice")->required();
  slices_cmd->add_option("--reference", slice_reference, "reference grid for difference slices");
  slices_cmd->add_option("--axis", slice_axis, "x | y | z")->capture_default_str();
  slices_cmd->add_option("--positions", slice_positions, "comma-separated voxel positions")->required();

  // run
  auto* run_cmd = app.add_subcommand("run", "full experiment from --config (manifest.json)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (*seed_opt) g.seed = seed_value;

  try {
    const fs::path out_dir = g.out;
    const int threads = resolve_threads(g.threads);
    std::optional<ExperimentConfig> cfg;
    if (!g.config.empty()) cfg = load_config(g);

    if (*phantom_cmd) {
      PhantomSpec spec = cfg ? cfg->phantom : PhantomSpec{};
      if (!kind.empty()) {
        spec.kind = parse_phantom_kind(kind);
        if (spec.kind == PhantomKind::file) throw UsageError("--kind file is not a generator");
      }
      if (!dims.empty()) spec.dims = {dims[0], dims[1], dims[2]};
      if (voxel_size > 0.0) spec.voxel_size_mm = voxel_size;
      const std::uint64_t master = g.seed.value_or(cfg ? cfg->seed : 0);
      fs::create_directories(out_dir);
      save_grid(make_phantom(spec, derive_seed(master, "phantom")), out_dir / "phantom.vxg");
      out << (out_dir / "phantom.vxg").string() << "\n";
    } else if (*layout_cmd) {
      LayoutSpec spec = cfg ? cfg->layout : LayoutSpec{};
      if (views) spec.n_views = *views;
      if (step) spec.view_angle_step_deg = *step;
      if (pitch) spec.pitch_deg = *pitch;
      if (!cfg || !cfg->layout_seed_set) spec.seed = derive_seed(g.seed.value_or(cfg ? cfg->seed : 0), "layout");
      GridGeometry geometry;
      if (!layout_grid.empty()) {
        require_file(layout_grid, "grid");
        geometry = load_grid(layout_grid).geometry();
      } else if (cfg) {
        geometry = GridGeometry::centered(cfg->phantom.dims, cfg->phantom.voxel_size_mm);
      } else {
        throw UsageError("layout needs --grid or --config");
      }
      const auto poses = build_layout(spec, geometry);
      fs::create_directories(out_dir);
      write_json(out_dir / "layout.json", {{"spec", spec}, {"poses", poses}});
      out << (out_dir / "layout.json").string() << "\n";
    } else if (*project_cmd) {
      require_file(project_grid, "grid");
      const VoxelGrid grid = load_grid(project_grid);
      const auto poses = load_layout(project_layout);
      std::vector<Image> images;
      for (std::size_t v = 0; v < poses.size(); ++v) {
        images.push_back(forward_project(grid, poses[v], static_cast<int>(v), threads));
      }
      for (const auto& p : save_images(images, out_dir)) out << p.string() << "\n";
    } else if (*noise_cmd) {
      if (!fs::is_directory(noise_images)) throw UsageError("image directory not found: " + noise_images);
      const auto images = load_images(noise_images);
      const std::uint64_t master = g.seed.value_or(cfg ? cfg->seed : 0);
      std::vector<Image> noisy;
      for (std::size_t v = 0; v < images.size(); ++v) {
        noisy.push_back(add_noise(images[v], noise_fraction, derive_seed(master, "noise/" + std::to_string(v)),
                                  noise_clamp));
      }
      for (const auto& p : save_images(noisy, out_dir)) out << p.string() << "\n";
    } else if (*art_cmd) {
      const Inputs in = resolve_inputs(g, art_in, cfg);
      ArtConfig art = cfg ? cfg->art.config : ArtConfig{};
      if (art_sweeps) art.sweeps = *art_sweeps;
      if (art_relaxation) art.relaxation = *art_relaxation;
      art.seed = derive_seed(in.seed, "art");
      const ArtResult result = art_reconstruct(in.images, in.layout, in.reference.geometry(), art, &in.reference);
      fs::create_directories(out_dir);
      save_grid(result.grid, out_dir / "art.vxg");
      std::ofstream csv(out_dir / "art_history.csv");
      csv << "sweep,residual_sum_squares,cosine_similarity,wall_ms\n" << std::setprecision(17);
      for (const auto& r : result.history) {
        csv << r.sweep << ',' << r.residual_sum_squares << ',';
        if (r.cosine_similarity) csv << *r.cosine_similarity;
        csv << ',' << r.wall_ms << '\n';
      }
      out << similarity(result.grid, in.reference).dump() << "\n";
    } else if (train_cmd->parsed() || transfer_cmd->parsed()) {
      const bool transfer = transfer_cmd->parsed();
      if (transfer) require_file(encoder_path, "encoder");
      const Inputs in = resolve_inputs(g, train_in, cfg);
      TrainConfig tc = cfg ? cfg->wernet.config : TrainConfig{};
      if (epochs) tc.epochs = *epochs;
      if (!variant.empty()) tc.encoder.variant = parse_encoder_variant(variant);
      if (!grad_norm.empty()) tc.grad_norm = grad_norm == "on";
      DatasetOptions ds;
      ds.include_zero_pixels = cfg ? cfg->include_zero_pixels : true;
      ds.seed = derive_seed(in.seed, "dataset");
      ds.threads = threads;
      const RayDataset dataset = build_dataset(in.reference.geometry(), in.layout, in.images, ds);
      const std::uint64_t train_seed = derive_seed(in.seed, "wernet");
      const auto progress = epoch_printer(err, g.quiet);
      TrainState state;
      if (transfer) {
        const EncoderCheckpoint ckpt = load_checkpoint(encoder_path);
        state = transfer_train(ckpt.encoder, dataset, tc, train_seed, &in.reference, progress);
      } else {
        state = train(dataset, tc, train_seed, &in.reference, progress);
      }
      fs::create_directories(out_dir);
      save_grid(state.voxels, out_dir / "wernet.vxg");
      write_metrics_csv(state.history, out_dir / "metrics.csv");
      if (!transfer) {
        save_checkpoint({state.encoder, {{"epochs", tc.epochs}, {"seed", train_seed}}}, out_dir / "encoder.wen");
      }
      out << similarity(state.voxels, in.reference).dump() << "\n";
    } else if (*eval_cmd) {
      require_file(eval_a, "a");
      require_file(eval_b, "b");
      out << similarity(load_grid(eval_a), load_grid(eval_b)).dump() << "\n";
    } else if (*slices_cmd) {
      require_file(slice_grid, "grid");
      const VoxelGrid grid = load_grid(slice_grid);
      std::optional<VoxelGrid> reference;
      if (!slice_reference.empty()) {
        require_file(slice_reference, "reference");
        reference = load_grid(slice_reference);
      }
      int axis = 0;
      try {
        axis = parse_axis(slice_axis);
      } catch (const ParameterError& e) {
        throw UsageError(e.what());
      }
      for (const auto& p : export_cross_sections(grid, axis, parse_positions(slice_positions), out_dir,
                                                 reference ? &*reference : nullptr)) {
        out << p.string() << "\n";
      }
    } else if (*run_cmd) {
      if (g.config.empty()) throw UsageError("run needs --config");
      const json doc = load_document(g.config);
      RunOptions opts;
      opts.out_dir = out_dir;
      opts.seed = g.seed;
      if (g.threads > 0) opts.threads = g.threads;
      if (!g.quiet) opts.log = [&err](const std::string& line) { err << line << "\n"; };
      std::vector<RunOutcome> outcomes;
      try {
        outcomes = run_experiment(doc, opts);
      } catch (const ParameterError& e) {
        throw UsageError(g.config + ": " + e.what());
      }
      bool ok = true;
      for (const auto& o : outcomes) {
        json line = {{"run", o.name}, {"status", o.manifest.at("status")}, {"metrics", o.manifest.at("metrics")}};
        out << line.dump() << "\n";
        ok = ok && o.ok;
      }
      return ok ? kExitOk : kExitRuntime;
    }
    return kExitOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace wernet::cli
