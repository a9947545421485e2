#include "wernet/config.hpp"

#include <fstream>
#include <set>

#include "json_util.hpp"
#include "wernet/errors.hpp"
#include "wernet/grid_io.hpp"

namespace wernet {

using nlohmann::json;
using detail::read_optional;
using detail::require_known_keys;

std::string_view phantom_kind_name(PhantomKind kind) {
  switch (kind) {
    case PhantomKind::jet:
      return "jet";
    case PhantomKind::turbulent:
      return "turbulent";
    case PhantomKind::homogeneous:
      return "homogeneous";
    case PhantomKind::file:
      return "file";
  }
  return "jet";
}

PhantomKind parse_phantom_kind(std::string_view name) {
  if (name == "jet") return PhantomKind::jet;
  if (name == "turbulent") return PhantomKind::turbulent;
  if (name == "homogeneous") return PhantomKind::homogeneous;
  if (name == "file") return PhantomKind::file;
  throw ParameterError("unknown phantom kind \"" + std::string(name) + "\"");
}

namespace {

const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  return j.contains(key) ? j.at(key) : empty;
}

PhantomSpec parse_phantom(const json& j) {
  constexpr std::string_view ctx = "phantom";
  require_known_keys(j, {"kind", "dims", "voxel_size_mm", "jet", "region", "path"}, ctx);
  PhantomSpec p;
  std::string kind = "jet";
  read_optional(j, "kind", kind, ctx);
  p.kind = parse_phantom_kind(kind);
  std::vector<int> dims{p.dims.nx, p.dims.ny, p.dims.nz};
  read_optional(j, "dims", dims, ctx);
  if (dims.size() != 3) throw ParameterError("phantom.dims must have 3 entries");
  p.dims = {dims[0], dims[1], dims[2]};
  read_optional(j, "voxel_size_mm", p.voxel_size_mm, ctx);
  read_optional(j, "path", p.path, ctx);
  if (j.contains("jet")) {
    const auto& jj = j.at("jet");
    require_known_keys(jj, {"core_radius_fraction", "axial_peak_fraction", "radial_sigma_fraction"}, "phantom.jet");
    read_optional(jj, "core_radius_fraction", p.jet.core_radius_fraction, "phantom.jet");
    read_optional(jj, "axial_peak_fraction", p.jet.axial_peak_fraction, "phantom.jet");
    read_optional(jj, "radial_sigma_fraction", p.jet.radial_sigma_fraction, "phantom.jet");
  }
  if (j.contains("region")) {
    const auto& r = j.at("region");
    require_known_keys(r, {"center_x", "center_z", "radius", "y_min", "y_max"}, "phantom.region");
    CylinderRegion region = CylinderRegion::inscribed(p.dims);
    read_optional(r, "center_x", region.center_x, "phantom.region");
    read_optional(r, "center_z", region.center_z, "phantom.region");
    read_optional(r, "radius", region.radius, "phantom.region");
    read_optional(r, "y_min", region.y_min, "phantom.region");
    read_optional(r, "y_max", region.y_max, "phantom.region");
    p.region = region;
  }
  if (p.kind == PhantomKind::file && p.path.empty()) throw ParameterError("phantom.path is required for kind \"file\"");
  GridGeometry{p.dims, p.voxel_size_mm, {}}.validate();
  return p;
}

json phantom_to_json(const PhantomSpec& p) {
  json j = {{"kind", std::string(phantom_kind_name(p.kind))},
            {"dims", {p.dims.nx, p.dims.ny, p.dims.nz}},
            {"voxel_size_mm", p.voxel_size_mm},
            {"jet",
             {{"core_radius_fraction", p.jet.core_radius_fraction},
              {"axial_peak_fraction", p.jet.axial_peak_fraction},
              {"radial_sigma_fraction", p.jet.radial_sigma_fraction}}}};
  if (p.region) {
    j["region"] = {{"center_x", p.region->center_x},
                   {"center_z", p.region->center_z},
                   {"radius", p.region->radius},
                   {"y_min", p.region->y_min},
                   {"y_max", p.region->y_max}};
  }
  if (!p.path.empty()) j["path"] = p.path;
  return j;
}

template <typename T>
void read_optional_value(const json& j, const char* key, std::optional<T>& out, std::string_view ctx) {
  if (!j.contains(key)) return;
  T value{};
  read_optional(j, key, value, ctx);
  out = value;
}

}  // namespace

VoxelGrid make_phantom(const PhantomSpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case PhantomKind::jet:
      return make_jet_flame(spec.dims, spec.voxel_size_mm, spec.jet);
    case PhantomKind::turbulent:
      return make_turbulent_flame(spec.dims, spec.voxel_size_mm, seed, spec.jet);
    case PhantomKind::homogeneous:
      return make_randomized_homogeneous(spec.dims, spec.voxel_size_mm, seed, spec.region);
    case PhantomKind::file:
      return load_grid(spec.path);
  }
  throw ParameterError("unknown phantom kind");
}

EncoderSpec parse_encoder_spec(const json& j) {
  constexpr std::string_view ctx = "encoder";
  require_known_keys(j, {"variant", "hidden_channels", "depth", "leaky_slope", "bn_momentum", "bn_epsilon"}, ctx);
  EncoderSpec s;
  std::string variant(to_string(s.variant));
  read_optional(j, "variant", variant, ctx);
  s.variant = parse_encoder_variant(variant);
  read_optional(j, "hidden_channels", s.hidden_channels, ctx);
  read_optional(j, "depth", s.depth, ctx);
  read_optional(j, "leaky_slope", s.leaky_slope, ctx);
  read_optional(j, "bn_momentum", s.bn_momentum, ctx);
  read_optional(j, "bn_epsilon", s.bn_epsilon, ctx);
  s.validate();
  return s;
}

json to_json(const EncoderSpec& s) {
  return {{"variant", std::string(to_string(s.variant))},
          {"hidden_channels", s.hidden_channels},
          {"depth", s.depth},
          {"leaky_slope", s.leaky_slope},
          {"bn_momentum", s.bn_momentum},
          {"bn_epsilon", s.bn_epsilon}};
}

TrainConfig parse_train_config(const json& j) {
  constexpr std::string_view ctx = "wernet";
  require_known_keys(j,
                     {"enabled", "lr_voxel", "lr_encoder", "lr_decay", "decay_period", "epochs", "batch_samples",
                      "rays_per_sample", "adam", "encoder", "grad_norm", "clamp_voxels", "voxel_init_max",
                      "log_first_epoch_steps"},
                     ctx);
  TrainConfig c;
  read_optional(j, "lr_voxel", c.lr_voxel, ctx);
  read_optional(j, "lr_encoder", c.lr_encoder, ctx);
  read_optional(j, "lr_decay", c.lr_decay, ctx);
  read_optional(j, "decay_period", c.decay_period, ctx);
  read_optional(j, "epochs", c.epochs, ctx);
  read_optional(j, "batch_samples", c.batch_samples, ctx);
  read_optional(j, "rays_per_sample", c.rays_per_sample, ctx);
  read_optional(j, "grad_norm", c.grad_norm, ctx);
  read_optional(j, "clamp_voxels", c.clamp_voxels, ctx);
  read_optional(j, "voxel_init_max", c.voxel_init_max, ctx);
  read_optional(j, "log_first_epoch_steps", c.log_first_epoch_steps, ctx);
  if (j.contains("adam")) {
    const auto& a = j.at("adam");
    require_known_keys(a, {"beta1", "beta2", "epsilon"}, "wernet.adam");
    read_optional(a, "beta1", c.adam.beta1, "wernet.adam");
    read_optional(a, "beta2", c.adam.beta2, "wernet.adam");
    read_optional(a, "epsilon", c.adam.epsilon, "wernet.adam");
  }
  if (j.contains("encoder")) c.encoder = parse_encoder_spec(j.at("encoder"));
  c.validate();
  return c;
}

json to_json(const TrainConfig& c) {
  return {{"lr_voxel", c.lr_voxel},
          {"lr_encoder", c.lr_encoder},
          {"lr_decay", c.lr_decay},
          {"decay_period", c.decay_period},
          {"epochs", c.epochs},
          {"batch_samples", c.batch_samples},
          {"rays_per_sample", c.rays_per_sample},
          {"adam", {{"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"epsilon", c.adam.epsilon}}},
          {"encoder", to_json(c.encoder)},
          {"grad_norm", c.grad_norm},
          {"clamp_voxels", c.clamp_voxels},
          {"voxel_init_max", c.voxel_init_max},
          {"log_first_epoch_steps", c.log_first_epoch_steps}};
}

ArtConfig parse_art_config(const json& j) {
  constexpr std::string_view ctx = "art";
  require_known_keys(j, {"enabled", "relaxation", "sweeps", "nonneg_clamp", "order"}, ctx);
  ArtConfig c;
  read_optional(j, "relaxation", c.relaxation, ctx);
  read_optional(j, "sweeps", c.sweeps, ctx);
  read_optional(j, "nonneg_clamp", c.nonneg_clamp, ctx);
  std::string order = "sequential";
  read_optional(j, "order", order, ctx);
  if (order == "sequential") {
    c.order = RayOrder::sequential;
  } else if (order == "shuffled") {
    c.order = RayOrder::shuffled;
  } else {
    throw ParameterError("art.order must be \"sequential\" or \"shuffled\"");
  }
  c.validate();
  return c;
}

json to_json(const ArtConfig& c) {
  return {{"relaxation", c.relaxation},
          {"sweeps", c.sweeps},
          {"nonneg_clamp", c.nonneg_clamp},
          {"order", c.order == RayOrder::sequential ? "sequential" : "shuffled"}};
}

ExperimentConfig parse_experiment_config(const json& j) {
  constexpr std::string_view ctx = "experiment config";
  if (!j.is_object()) throw ParameterError("experiment config must be a JSON object");
  if (j.contains("runs")) throw ParameterError("\"runs\" must be expanded before parsing a single run");
  require_known_keys(j,
                     {"schema_version", "name", "seed", "threads", "phantom", "layout", "noise", "dataset", "art",
                      "wernet", "transfer", "expect", "slices"},
                     ctx);
  ExperimentConfig c;
  if (!j.contains("schema_version")) throw ParameterError("config is missing \"schema_version\"");
  read_optional(j, "schema_version", c.schema_version, ctx);
  if (c.schema_version != kConfigSchemaVersion) {
    throw ParameterError("unsupported schema_version " + std::to_string(c.schema_version));
  }
  read_optional(j, "name", c.name, ctx);
  read_optional(j, "seed", c.seed, ctx);
  read_optional(j, "threads", c.threads, ctx);
  if (c.threads < 0) throw ParameterError("threads must be >= 0");
  c.phantom = parse_phantom(section(j, "phantom"));

  if (j.contains("layout")) {
    c.layout = j.at("layout").get<LayoutSpec>();
    c.layout_seed_set = j.at("layout").contains("seed");
  }

  const auto& noise = section(j, "noise");
  require_known_keys(noise, {"fraction", "clamp_nonnegative"}, "noise");
  read_optional(noise, "fraction", c.noise.fraction, "noise");
  read_optional(noise, "clamp_nonnegative", c.noise.clamp_nonnegative, "noise");
  if (!(c.noise.fraction >= 0.0)) throw ParameterError("noise.fraction must be >= 0");

  const auto& dataset = section(j, "dataset");
  require_known_keys(dataset, {"include_zero_pixels"}, "dataset");
  read_optional(dataset, "include_zero_pixels", c.include_zero_pixels, "dataset");

  const auto& art = section(j, "art");
  c.art.config = parse_art_config(art);
  read_optional(art, "enabled", c.art.enabled, "art");

  const auto& wernet = section(j, "wernet");
  c.wernet.config = parse_train_config(wernet);
  read_optional(wernet, "enabled", c.wernet.enabled, "wernet");

  const auto& transfer = section(j, "transfer");
  require_known_keys(transfer, {"enabled", "source_run", "checkpoint"}, "transfer");
  read_optional(transfer, "enabled", c.transfer.enabled, "transfer");
  read_optional(transfer, "source_run", c.transfer.source_run, "transfer");
  read_optional(transfer, "checkpoint", c.transfer.checkpoint, "transfer");
  if (c.transfer.enabled && c.transfer.source_run.empty() == c.transfer.checkpoint.empty()) {
    throw ParameterError("transfer needs exactly one of \"source_run\" or \"checkpoint\"");
  }

  const auto& expect = section(j, "expect");
  require_known_keys(expect,
                     {"min_similarity", "max_distance", "art_min_similarity", "wernet_beats_art", "min_gap_over_art"},
                     "expect");
  read_optional_value(expect, "min_similarity", c.expect.min_similarity, "expect");
  read_optional_value(expect, "max_distance", c.expect.max_distance, "expect");
  read_optional_value(expect, "art_min_similarity", c.expect.art_min_similarity, "expect");
  read_optional(expect, "wernet_beats_art", c.expect.wernet_beats_art, "expect");
  read_optional_value(expect, "min_gap_over_art", c.expect.min_gap_over_art, "expect");

  const auto& slices = section(j, "slices");
  require_known_keys(slices, {"enabled", "axis", "positions"}, "slices");
  read_optional(slices, "enabled", c.slices.enabled, "slices");
  read_optional(slices, "axis", c.slices.axis, "slices");
  read_optional(slices, "positions", c.slices.positions, "slices");
  if (c.slices.axis < 0 || c.slices.axis > 2) throw ParameterError("slices.axis must be 0, 1 or 2");
  return c;
}

json to_json(const ExperimentConfig& c) {
  json art = to_json(c.art.config);
  art["enabled"] = c.art.enabled;
  json wernet = to_json(c.wernet.config);
  wernet["enabled"] = c.wernet.enabled;
  json expect = json::object();
  if (c.expect.min_similarity) expect["min_similarity"] = *c.expect.min_similarity;
  if (c.expect.max_distance) expect["max_distance"] = *c.expect.max_distance;
  if (c.expect.art_min_similarity) expect["art_min_similarity"] = *c.expect.art_min_similarity;
  if (c.expect.wernet_beats_art) expect["wernet_beats_art"] = true;
  if (c.expect.min_gap_over_art) expect["min_gap_over_art"] = *c.expect.min_gap_over_art;
  json j = {{"schema_version", c.schema_version},
            {"name", c.name},
            {"seed", c.seed},
            {"threads", c.threads},
            {"phantom", phantom_to_json(c.phantom)},
            {"layout", c.layout},
            {"noise", {{"fraction", c.noise.fraction}, {"clamp_nonnegative", c.noise.clamp_nonnegative}}},
            {"dataset", {{"include_zero_pixels", c.include_zero_pixels}}},
            {"art", art},
            {"wernet", wernet},
            {"expect", expect},
            {"slices", {{"enabled", c.slices.enabled}, {"axis", c.slices.axis}, {"positions", c.slices.positions}}}};
  if (c.transfer.enabled) {
    j["transfer"] = {{"enabled", true}};
    if (!c.transfer.source_run.empty()) j["transfer"]["source_run"] = c.transfer.source_run;
    if (!c.transfer.checkpoint.empty()) j["transfer"]["checkpoint"] = c.transfer.checkpoint;
  }
  return j;
}

std::vector<std::pair<std::string, json>> expand_runs(const json& document) {
  if (!document.is_object()) throw ParameterError("experiment config must be a JSON object");
  std::vector<std::pair<std::string, json>> runs;
  if (!document.contains("runs")) {
    runs.emplace_back(document.value("name", std::string("experiment")), document);
    return runs;
  }
  json base = document;
  base.erase("runs");
  const auto& list = document.at("runs");
  if (!list.is_array() || list.empty()) throw ParameterError("\"runs\" must be a non-empty array");
  std::set<std::string> names;
  for (const auto& patch : list) {
    if (!patch.is_object() || !patch.contains("name") || !patch.at("name").is_string()) {
      throw ParameterError("every entry of \"runs\" needs a string \"name\"");
    }
    const auto name = patch.at("name").get<std::string>();
    if (name.empty() || name.find_first_of("/\\") != std::string::npos || name == "." || name == "..") {
      throw ParameterError("run name \"" + name + "\" is not a valid directory name");
    }
    if (!names.insert(name).second) throw ParameterError("duplicate run name \"" + name + "\"");
    json merged = base;
    merged.merge_patch(patch);
    runs.emplace_back(name, std::move(merged));
  }
  return runs;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParameterError("malformed JSON in " + path + ": " + e.what());
  }
}

}  // namespace wernet
