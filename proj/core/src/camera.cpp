#include "wernet/camera.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "json_util.hpp"
#include "wernet/errors.hpp"

namespace wernet {

void CameraPose::validate() const {
  if (!(distance_mm > 0.0) || !std::isfinite(distance_mm)) throw ParameterError("camera distance must be > 0");
  if (rows < 1 || cols < 1) throw ParameterError("detector rows/cols must be >= 1");
  if (!(focal_length_mm > 0.0) || !(pixel_pitch_mm > 0.0)) {
    throw ParameterError("focal length and pixel pitch must be > 0");
  }
  if (!std::isfinite(view_angle_deg) || !std::isfinite(pitch_angle_deg)) {
    throw ParameterError("camera angles must be finite");
  }
  if (std::abs(pitch_angle_deg) >= 90.0) throw ParameterError("pitch angle must lie strictly within (-90, 90)");
}

Vec3 CameraPose::position() const {
  const double view = deg_to_rad(view_angle_deg);
  const double pitch = deg_to_rad(pitch_angle_deg);
  const Vec3 offset{std::sin(view) * std::cos(pitch), std::sin(pitch), std::cos(view) * std::cos(pitch)};
  return look_at + offset * distance_mm;
}

Vec3 CameraPose::forward() const { return normalized(look_at - position()); }

Vec3 CameraPose::right() const { return normalized(cross(forward(), Vec3{0.0, 1.0, 0.0})); }

Vec3 CameraPose::up() const { return cross(right(), forward()); }

std::vector<CameraPose> build_layout(const LayoutSpec& spec, const GridGeometry& grid) {
  grid.validate();
  if (spec.n_views < 1) throw ParameterError("layout needs at least one view");
  if (!std::isfinite(spec.view_angle_start_deg) || !std::isfinite(spec.view_angle_step_deg) ||
      !std::isfinite(spec.pitch_deg)) {
    throw ParameterError("layout angles must be finite");
  }
  if (spec.rows < 1 || spec.cols < 1) throw ParameterError("detector rows/cols must be >= 1");
  if (!(spec.fov_margin > 0.0) || !(spec.focal_length_mm > 0.0)) {
    throw ParameterError("fov_margin and focal_length must be > 0");
  }
  if (spec.distance_mode == DistanceMode::fixed && !(spec.distance_mm > 0.0)) {
    throw ParameterError("camera distance must be > 0");
  }
  if (spec.distance_mode == DistanceMode::uniform_random &&
      (!(spec.distance_min_mm > 0.0) || spec.distance_min_mm > spec.distance_max_mm)) {
    throw ParameterError("random distance range must satisfy 0 < min <= max");
  }

  const Vec3 extent = grid.extent();
  const double sphere = grid.bounding_sphere_diameter();
  const double footprint = std::sqrt(extent.x * extent.x + extent.z * extent.z);
  // Object-space size that one pixel must cover, before the perspective scale f/d.
  const double object_per_pixel = spec.fov_margin * std::max(sphere / spec.cols, footprint / spec.rows);

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> distance_dist(spec.distance_min_mm, spec.distance_max_mm);

  std::vector<CameraPose> poses;
  poses.reserve(static_cast<std::size_t>(spec.n_views));
  for (int k = 0; k < spec.n_views; ++k) {
    CameraPose pose;
    pose.view_angle_deg = spec.view_angle_start_deg + k * spec.view_angle_step_deg;
    pose.pitch_angle_deg =
        spec.pitch_pattern == PitchPattern::constant ? spec.pitch_deg : (k % 2 == 0 ? spec.pitch_deg : -spec.pitch_deg);
    pose.distance_mm = spec.distance_mode == DistanceMode::fixed ? spec.distance_mm : distance_dist(rng);
    pose.look_at = grid.center();
    pose.rows = spec.rows;
    pose.cols = spec.cols;
    pose.focal_length_mm = spec.focal_length_mm;
    pose.pixel_pitch_mm = object_per_pixel * spec.focal_length_mm / pose.distance_mm;
    pose.validate();
    poses.push_back(pose);
  }
  return poses;
}

Ray pixel_ray(const CameraPose& pose, int row, int col) {
  if (row < 0 || row >= pose.rows || col < 0 || col >= pose.cols) {
    throw ParameterError("pixel (" + std::to_string(row) + ", " + std::to_string(col) + ") outside " +
                         std::to_string(pose.rows) + "x" + std::to_string(pose.cols) + " detector");
  }
  const Vec3 fwd = pose.forward();
  const Vec3 right = normalized(cross(fwd, Vec3{0.0, 1.0, 0.0}));
  const Vec3 up = cross(right, fwd);
  // The sensor point sits at -(f*fwd + offset) behind the pinhole; mirroring it through the
  // aperture yields the direction below.
  const double du = (col - 0.5 * (pose.cols - 1)) * pose.pixel_pitch_mm;
  const double dr = (row - 0.5 * (pose.rows - 1)) * pose.pixel_pitch_mm;
  const Vec3 dir = fwd * pose.focal_length_mm + up * du + right * dr;
  return {pose.position(), normalized(dir)};
}

void to_json(nlohmann::json& j, const CameraPose& p) {
  j = {{"view_angle_deg", p.view_angle_deg},
       {"pitch_angle_deg", p.pitch_angle_deg},
       {"distance_mm", p.distance_mm},
       {"look_at_mm", {p.look_at.x, p.look_at.y, p.look_at.z}},
       {"rows", p.rows},
       {"cols", p.cols},
       {"focal_length_mm", p.focal_length_mm},
       {"pixel_pitch_mm", p.pixel_pitch_mm}};
}

void from_json(const nlohmann::json& j, CameraPose& p) {
  constexpr std::string_view ctx = "camera pose";
  detail::require_known_keys(j,
                             {"view_angle_deg", "pitch_angle_deg", "distance_mm", "look_at_mm", "rows", "cols",
                              "focal_length_mm", "pixel_pitch_mm"},
                             ctx);
  CameraPose out;
  detail::read_optional(j, "view_angle_deg", out.view_angle_deg, ctx);
  detail::read_optional(j, "pitch_angle_deg", out.pitch_angle_deg, ctx);
  detail::read_optional(j, "distance_mm", out.distance_mm, ctx);
  std::vector<double> look{0.0, 0.0, 0.0};
  detail::read_optional(j, "look_at_mm", look, ctx);
  if (look.size() != 3) throw ParameterError("look_at_mm must have 3 entries");
  out.look_at = {look[0], look[1], look[2]};
  detail::read_optional(j, "rows", out.rows, ctx);
  detail::read_optional(j, "cols", out.cols, ctx);
  detail::read_optional(j, "focal_length_mm", out.focal_length_mm, ctx);
  detail::read_optional(j, "pixel_pitch_mm", out.pixel_pitch_mm, ctx);
  out.validate();
  p = out;
}

void to_json(nlohmann::json& j, const LayoutSpec& s) {
  nlohmann::json pitch = {{"mode", s.pitch_pattern == PitchPattern::constant ? "constant" : "alternating"},
                          {"angle_deg", s.pitch_deg}};
  nlohmann::json distance;
  if (s.distance_mode == DistanceMode::fixed) {
    distance = {{"mode", "fixed"}, {"mm", s.distance_mm}};
  } else {
    distance = {{"mode", "uniform_random"}, {"min_mm", s.distance_min_mm}, {"max_mm", s.distance_max_mm}};
  }
  j = {{"n_views", s.n_views},
       {"view_angle_start_deg", s.view_angle_start_deg},
       {"view_angle_step_deg", s.view_angle_step_deg},
       {"pitch", pitch},
       {"distance", distance},
       {"seed", s.seed},
       {"rows", s.rows},
       {"cols", s.cols},
       {"fov_margin", s.fov_margin},
       {"focal_length_mm", s.focal_length_mm}};
}

void from_json(const nlohmann::json& j, LayoutSpec& s) {
  constexpr std::string_view ctx = "layout";
  detail::require_known_keys(j,
                             {"n_views", "view_angle_start_deg", "view_angle_step_deg", "pitch", "distance", "seed",
                              "rows", "cols", "fov_margin", "focal_length_mm"},
                             ctx);
  LayoutSpec out;
  detail::read_optional(j, "n_views", out.n_views, ctx);
  detail::read_optional(j, "view_angle_start_deg", out.view_angle_start_deg, ctx);
  detail::read_optional(j, "view_angle_step_deg", out.view_angle_step_deg, ctx);
  detail::read_optional(j, "seed", out.seed, ctx);
  detail::read_optional(j, "rows", out.rows, ctx);
  detail::read_optional(j, "cols", out.cols, ctx);
  detail::read_optional(j, "fov_margin", out.fov_margin, ctx);
  detail::read_optional(j, "focal_length_mm", out.focal_length_mm, ctx);
  if (j.contains("pitch")) {
    const auto& p = j.at("pitch");
    detail::require_known_keys(p, {"mode", "angle_deg"}, "layout.pitch");
    std::string mode = "constant";
    detail::read_optional(p, "mode", mode, "layout.pitch");
    if (mode == "constant") {
      out.pitch_pattern = PitchPattern::constant;
    } else if (mode == "alternating") {
      out.pitch_pattern = PitchPattern::alternating;
    } else {
      throw ParameterError("layout.pitch.mode must be \"constant\" or \"alternating\"");
    }
    detail::read_optional(p, "angle_deg", out.pitch_deg, "layout.pitch");
  }
  if (j.contains("distance")) {
    const auto& d = j.at("distance");
    detail::require_known_keys(d, {"mode", "mm", "min_mm", "max_mm"}, "layout.distance");
    std::string mode = "fixed";
    detail::read_optional(d, "mode", mode, "layout.distance");
    if (mode == "fixed") {
      out.distance_mode = DistanceMode::fixed;
    } else if (mode == "uniform_random") {
      out.distance_mode = DistanceMode::uniform_random;
    } else {
      throw ParameterError("layout.distance.mode must be \"fixed\" or \"uniform_random\"");
    }
    detail::read_optional(d, "mm", out.distance_mm, "layout.distance");
    detail::read_optional(d, "min_mm", out.distance_min_mm, "layout.distance");
    detail::read_optional(d, "max_mm", out.distance_max_mm, "layout.distance");
  }
  s = out;
}

}  // namespace wernet
