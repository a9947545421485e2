#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wernet/camera.hpp"
#include "wernet/config.hpp"
#include "wernet/image.hpp"
#include "wernet/voxel_grid.hpp"

namespace wernet {

struct RunOptions {
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;  // overrides the config's master seed
  std::optional<int> threads;         // overrides the config's thread count
  std::function<void(const std::string&)> log;
};

struct RunOutcome {
  std::string name;
  std::filesystem::path dir;
  nlohmann::json manifest;
  bool ok = false;
};

/// Ground truth, poses and (noisy) images of one configured case.
struct Scene {
  VoxelGrid truth;
  LayoutSpec layout_spec;  // with the effective seed
  std::vector<CameraPose> layout;
  std::vector<Image> images;
};

/// phantom -> layout -> projection -> noise, with sub-seeds derived from config.seed.
Scene build_scene(const ExperimentConfig& config, int threads);

/// Executes phantom -> layout -> projection -> (noise) -> ART and/or WERNet (or transfer) -> metrics
/// for every run in `document` (see expand_runs). A single-run document writes into out_dir directly,
/// multi-run documents into out_dir/<run name>/ plus a summary out_dir/manifest.json.
/// Stage errors are recorded in the run's manifest (status "error") rather than thrown; config
/// errors throw ParameterError before anything runs.
std::vector<RunOutcome> run_experiment(const nlohmann::json& document, const RunOptions& options);

/// One configured run into `dir`. `encoder_dirs` maps earlier run names to their directories
/// for transfer.source_run.
RunOutcome run_single(const ExperimentConfig& config, const std::filesystem::path& dir,
                      const std::function<std::filesystem::path(const std::string&)>& resolve_run,
                      const std::function<void(const std::string&)>& log = {});

/// Sub-seeds of the master seed used by the runner, keyed by component name.
nlohmann::json derived_seeds(std::uint64_t master);

/// First (possibly fractional) epoch count at which the logged similarity reaches `threshold`.
std::optional<double> epochs_to_reach(const std::vector<MetricRecord>& history, double threshold);

/// FNV-1a 64 of a file's bytes, as 16 lowercase hex digits.
std::string file_checksum(const std::filesystem::path& path);

/// Image directory helpers: view_000.img, view_001.img, ...
std::vector<std::filesystem::path> save_images(const std::vector<Image>& images, const std::filesystem::path& dir);
std::vector<Image> load_images(const std::filesystem::path& dir);

}  // namespace wernet
