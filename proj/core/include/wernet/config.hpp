#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "wernet/art.hpp"
#include "wernet/camera.hpp"
#include "wernet/phantoms.hpp"
#include "wernet/trainer.hpp"

namespace wernet {

inline constexpr int kConfigSchemaVersion = 1;

enum class PhantomKind { jet, turbulent, homogeneous, file };

std::string_view phantom_kind_name(PhantomKind kind);
PhantomKind parse_phantom_kind(std::string_view name);

struct PhantomSpec {
  PhantomKind kind = PhantomKind::jet;
  Dims dims{30, 140, 30};
  double voxel_size_mm = 0.5;
  JetFlameParams jet;
  std::optional<CylinderRegion> region;  // homogeneous only
  std::string path;                      // file only
};

/// Builds (or loads) the phantom; `seed` feeds the randomized kinds.
VoxelGrid make_phantom(const PhantomSpec& spec, std::uint64_t seed);

struct NoiseSpec {
  double fraction = 0.0;  // sigma as a fraction of each image's maximum
  bool clamp_nonnegative = false;
};

struct ArtStage {
  bool enabled = false;
  ArtConfig config;
};

struct WernetStage {
  bool enabled = true;
  TrainConfig config;
};

/// Freezes an encoder from an earlier run of the same experiment or from a WEN1 file and trains
/// only the voxels.
struct TransferStage {
  bool enabled = false;
  std::string source_run;
  std::string checkpoint;
};

/// Pass/fail thresholds recorded in the manifest.
struct Expectations {
  std::optional<double> min_similarity;
  std::optional<double> max_distance;
  std::optional<double> art_min_similarity;
  bool wernet_beats_art = false;
  std::optional<double> min_gap_over_art;
};

struct SliceStage {
  bool enabled = false;
  int axis = 2;
  std::vector<int> positions;  // empty: middle of the axis
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::string name = "experiment";
  std::uint64_t seed = 0;
  int threads = 0;
  PhantomSpec phantom;
  LayoutSpec layout;
  bool layout_seed_set = false;  // otherwise derived from the master seed
  NoiseSpec noise;
  bool include_zero_pixels = true;
  ArtStage art;
  WernetStage wernet;
  TransferStage transfer;
  Expectations expect;
  SliceStage slices;
};

/// Strict parse: unknown keys, wrong types or a schema_version other than 1 throw ParameterError.
/// A "runs" key is rejected here; use expand_runs for multi-run files.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& config);

/// Splits a config file into named runs: without "runs" the file is one run named by its "name";
/// otherwise each entry of "runs" (which must carry a unique "name") is JSON-merge-patched onto the
/// remaining document.
std::vector<std::pair<std::string, nlohmann::json>> expand_runs(const nlohmann::json& document);

/// Reads a JSON file; ParameterError names the path when it is missing or malformed.
nlohmann::json read_json_file(const std::string& path);

TrainConfig parse_train_config(const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& config);
EncoderSpec parse_encoder_spec(const nlohmann::json& j);
nlohmann::json to_json(const EncoderSpec& spec);
ArtConfig parse_art_config(const nlohmann::json& j);
nlohmann::json to_json(const ArtConfig& config);

}  // namespace wernet
