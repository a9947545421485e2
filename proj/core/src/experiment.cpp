#include "wernet/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "binary_io.hpp"
#include "wernet/checkpoint.hpp"
#include "wernet/dataset.hpp"
#include "wernet/errors.hpp"
#include "wernet/grid_io.hpp"
#include "wernet/metrics.hpp"
#include "wernet/parallel.hpp"
#include "wernet/projector.hpp"
#include "wernet/seeding.hpp"
#include "wernet/slices.hpp"

namespace wernet {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void say(const std::function<void(const std::string&)>& log, const std::string& text) {
  if (log) log(text);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

void write_art_history(const ArtResult& result, const fs::path& path) {
  std::ostringstream out;
  out << "sweep,residual_sum_squares,cosine_similarity,wall_ms\n" << std::setprecision(17);
  for (const auto& r : result.history) {
    out << r.sweep << ',' << r.residual_sum_squares << ',';
    if (r.cosine_similarity) out << *r.cosine_similarity;
    out << ',' << r.wall_ms << '\n';
  }
  write_text(path, out.str());
}

json similarity_json(double s) { return {{"S_C", s}, {"D_C", cosine_distance(s)}}; }

json check(double value, double threshold, bool pass) {
  return {{"value", value}, {"threshold", threshold}, {"pass", pass}};
}

}  // namespace

json derived_seeds(std::uint64_t master) {
  json seeds = {{"master", master}};
  for (const char* component : {"phantom", "layout", "noise", "dataset", "art", "wernet"}) {
    seeds[component] = derive_seed(master, component);
  }
  return seeds;
}

std::optional<double> epochs_to_reach(const std::vector<MetricRecord>& history, double threshold) {
  for (const auto& r : history) {
    if (r.cosine_similarity && *r.cosine_similarity >= threshold) return r.epoch;
  }
  return std::nullopt;
}

std::string file_checksum(const fs::path& path) {
  const auto bytes = detail::read_file(path);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(stable_hash(bytes)));
  return buf;
}

std::vector<fs::path> save_images(const std::vector<Image>& images, const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<fs::path> paths;
  for (std::size_t i = 0; i < images.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "view_%03zu.img", i);
    paths.push_back(dir / name);
    save_image(images[i], paths.back());
  }
  return paths;
}

std::vector<Image> load_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ParameterError("image directory " + dir.string() + " does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".img") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ParameterError("no .img files in " + dir.string());
  std::vector<Image> images;
  for (const auto& f : files) images.push_back(load_image(f));
  return images;
}

Scene build_scene(const ExperimentConfig& config, int threads) {
  const std::uint64_t master = config.seed;
  Scene scene;
  scene.truth = make_phantom(config.phantom, derive_seed(master, "phantom"));
  scene.layout_spec = config.layout;
  if (!config.layout_seed_set) scene.layout_spec.seed = derive_seed(master, "layout");
  scene.layout = build_layout(scene.layout_spec, scene.truth.geometry());
  for (std::size_t v = 0; v < scene.layout.size(); ++v) {
    Image img = forward_project(scene.truth, scene.layout[v], static_cast<int>(v), threads);
    if (config.noise.fraction > 0.0) {
      img = add_noise(img, config.noise.fraction, derive_seed(master, "noise/" + std::to_string(v)),
                      config.noise.clamp_nonnegative);
    }
    scene.images.push_back(std::move(img));
  }
  return scene;
}

RunOutcome run_single(const ExperimentConfig& config, const fs::path& dir,
                      const std::function<fs::path(const std::string&)>& resolve_run,
                      const std::function<void(const std::string&)>& log) {
  RunOutcome outcome;
  outcome.name = config.name;
  outcome.dir = dir;
  json manifest = {{"schema_version", kConfigSchemaVersion},
                   {"name", config.name},
                   {"config", to_json(config)},
                   {"seeds", derived_seeds(config.seed)}};
  json metrics = json::object();
  json checks = json::object();
  const std::uint64_t master = config.seed;
  const int threads = resolve_threads(config.threads);

  try {
    fs::create_directories(dir);
    say(log, "[" + config.name + "] building scene");
    const Scene scene = build_scene(config, threads);
    const VoxelGrid& truth = scene.truth;
    const auto& layout = scene.layout;
    const auto& images = scene.images;
    save_grid(truth, dir / "ground_truth.vxg");
    write_text(dir / "layout.json", json{{"spec", scene.layout_spec}, {"poses", layout}}.dump(2) + "\n");
    save_images(images, dir / "images");

    std::optional<double> art_similarity;
    if (config.art.enabled) {
      say(log, "[" + config.name + "] ART, " + std::to_string(config.art.config.sweeps) + " sweeps");
      ArtConfig art_cfg = config.art.config;
      art_cfg.seed = derive_seed(master, "art");
      const ArtResult art = art_reconstruct(images, layout, truth.geometry(), art_cfg, &truth);
      save_grid(art.grid, dir / "art.vxg");
      write_art_history(art, dir / "art_history.csv");
      art_similarity = cosine_similarity(art.grid, truth);
      metrics["art"] = similarity_json(*art_similarity);
    }

    std::optional<double> wernet_similarity;
    if (config.wernet.enabled || config.transfer.enabled) {
      DatasetOptions ds_opts;
      ds_opts.include_zero_pixels = config.include_zero_pixels;
      ds_opts.seed = derive_seed(master, "dataset");
      ds_opts.threads = threads;
      const RayDataset dataset = build_dataset(truth.geometry(), layout, images, ds_opts);
      say(log, "[" + config.name + "] dataset: " + std::to_string(dataset.size()) + " rays, N = " +
                   std::to_string(dataset.capacity()));

      const TrainConfig& tc = config.wernet.config;
      const std::uint64_t train_seed = derive_seed(master, "wernet");
      const auto progress = [&](const MetricRecord& r) {
        if (r.per_step) return;
        std::ostringstream line;
        line << "[" << config.name << "] epoch " << r.epoch << " loss " << std::setprecision(6) << r.loss;
        if (r.cosine_similarity) line << " S_C " << std::setprecision(8) << *r.cosine_similarity;
        say(log, line.str());
      };

      TrainState state;
      json wernet_metrics = json::object();
      if (config.transfer.enabled) {
        const fs::path source = config.transfer.checkpoint.empty()
                                    ? resolve_run(config.transfer.source_run) / "encoder.wen"
                                    : fs::path(config.transfer.checkpoint);
        say(log, "[" + config.name + "] transfer with frozen encoder " + source.string());
        const EncoderCheckpoint ckpt = load_checkpoint(source);
        state = transfer_train(ckpt.encoder, dataset, tc, train_seed, &truth, progress);
        wernet_metrics["encoder_source"] = source.string();
        wernet_metrics["encoder_provenance"] = ckpt.provenance;
      } else {
        say(log, "[" + config.name + "] WERNet, " + std::to_string(tc.epochs) + " epochs");
        state = train(dataset, tc, train_seed, &truth, progress);
        EncoderCheckpoint ckpt{state.encoder,
                               {{"run", config.name},
                                {"phantom", std::string(phantom_kind_name(config.phantom.kind))},
                                {"epochs", tc.epochs},
                                {"seed", train_seed},
                                {"final_similarity", state.final_similarity().value_or(0.0)}}};
        save_checkpoint(ckpt, dir / "encoder.wen");
      }
      save_grid(state.voxels, dir / "wernet.vxg");
      write_metrics_csv(state.history, dir / "metrics.csv");

      wernet_similarity = cosine_similarity(state.voxels, truth);
      wernet_metrics.update(similarity_json(*wernet_similarity));
      wernet_metrics["epochs"] = tc.epochs;
      wernet_metrics["steps"] = state.step;
      wernet_metrics["final_loss"] = state.history.empty() ? 0.0 : state.epoch_history().back().loss;
      json reach = json::object();
      for (double t : {0.9, 0.95, 0.99, 0.999}) {
        const auto e = epochs_to_reach(state.history, t);
        std::ostringstream key;
        key << t;
        reach[key.str()] = e ? json(*e) : json(nullptr);
      }
      wernet_metrics["epochs_to_similarity"] = reach;
      metrics["wernet"] = wernet_metrics;

      if (config.slices.enabled) {
        std::vector<int> positions = config.slices.positions;
        if (positions.empty()) positions.push_back(truth.dims()[config.slices.axis] / 2);
        export_cross_sections(state.voxels, config.slices.axis, positions, dir / "slices", &truth, "wernet");
      }
    }

    const auto& e = config.expect;
    if (e.min_similarity) {
      if (!wernet_similarity) throw ParameterError("expect.min_similarity needs the WERNet stage");
      checks["min_similarity"] = check(*wernet_similarity, *e.min_similarity, *wernet_similarity >= *e.min_similarity);
    }
    if (e.max_distance) {
      if (!wernet_similarity) throw ParameterError("expect.max_distance needs the WERNet stage");
      const double d = cosine_distance(*wernet_similarity);
      checks["max_distance"] = check(d, *e.max_distance, d < *e.max_distance);
    }
    if (e.art_min_similarity) {
      if (!art_similarity) throw ParameterError("expect.art_min_similarity needs the ART stage");
      checks["art_min_similarity"] = check(*art_similarity, *e.art_min_similarity, *art_similarity >= *e.art_min_similarity);
    }
    if (e.wernet_beats_art || e.min_gap_over_art) {
      if (!art_similarity || !wernet_similarity) throw ParameterError("comparison checks need both ART and WERNet");
      const double gap = *wernet_similarity - *art_similarity;
      const double need = e.min_gap_over_art.value_or(0.0);
      checks["wernet_beats_art"] = check(gap, need, e.min_gap_over_art ? gap >= need : gap > 0.0);
    }
    manifest["status"] = "ok";
    outcome.ok = true;
  } catch (const std::exception& ex) {
    manifest["status"] = "error";
    manifest["error"] = ex.what();
    say(log, "[" + config.name + "] error: " + ex.what());
  }
  manifest["metrics"] = metrics;
  manifest["checks"] = checks;
  bool all_pass = true;
  for (const auto& c : checks) all_pass = all_pass && c.at("pass").get<bool>();
  manifest["all_checks_pass"] = all_pass;

  json files = json::array();
  if (fs::is_directory(dir)) {
    std::vector<fs::path> paths;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().filename() != "manifest.json") paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) {
      files.push_back({{"path", fs::relative(p, dir).generic_string()},
                       {"bytes", fs::file_size(p)},
                       {"fnv1a64", file_checksum(p)}});
    }
  }
  manifest["files"] = files;
  if (fs::is_directory(dir)) write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  outcome.manifest = std::move(manifest);
  return outcome;
}

std::vector<RunOutcome> run_experiment(const json& document, const RunOptions& options) {
  const auto runs = expand_runs(document);
  const bool multi = document.contains("runs");

  // Parse everything up front so a typo in the last run fails before any work starts.
  std::vector<ExperimentConfig> configs;
  for (const auto& [name, doc] : runs) {
    ExperimentConfig cfg = parse_experiment_config(doc);
    cfg.name = name;
    if (options.seed) cfg.seed = *options.seed;
    if (options.threads) cfg.threads = *options.threads;
    configs.push_back(std::move(cfg));
  }
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto& src = configs[i].transfer.source_run;
    if (!configs[i].transfer.enabled || src.empty()) continue;
    const auto it = std::find_if(configs.begin(), configs.begin() + static_cast<std::ptrdiff_t>(i),
                                 [&](const ExperimentConfig& c) { return c.name == src; });
    if (it == configs.begin() + static_cast<std::ptrdiff_t>(i)) {
      throw ParameterError("transfer.source_run \"" + src + "\" must name an earlier run");
    }
  }

  const auto resolve = [&](const std::string& name) { return multi ? options.out_dir / name : options.out_dir; };
  std::vector<RunOutcome> outcomes;
  for (const auto& cfg : configs) {
    outcomes.push_back(run_single(cfg, multi ? options.out_dir / cfg.name : options.out_dir, resolve, options.log));
  }

  if (multi) {
    json summary = {{"schema_version", kConfigSchemaVersion}, {"runs", json::array()}};
    for (const auto& o : outcomes) {
      summary["runs"].push_back({{"name", o.name},
                                 {"status", o.manifest.at("status")},
                                 {"metrics", o.manifest.at("metrics")},
                                 {"checks", o.manifest.at("checks")},
                                 {"manifest", (fs::path(o.name) / "manifest.json").generic_string()},
                                 {"manifest_fnv1a64", file_checksum(o.dir / "manifest.json")}});
    }
    write_text(options.out_dir / "manifest.json", summary.dump(2) + "\n");
  }
  return outcomes;
}

}  // namespace wernet
