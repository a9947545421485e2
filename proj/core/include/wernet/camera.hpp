#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "wernet/geometry.hpp"
#include "wernet/voxel_grid.hpp"

namespace wernet {

/// Pinhole view of the scene. Angles in degrees, lengths in millimeters.
///
/// The camera sits at look_at + distance * (sin(view) cos(pitch), sin(pitch), cos(view) cos(pitch))
/// and looks at look_at. Detector columns run along the camera's up axis and rows along its right
/// axis, so the long side of a rows x cols (rows < cols) detector follows the vertical flame axis.
struct CameraPose {
  double view_angle_deg = 0.0;
  double pitch_angle_deg = 0.0;
  double distance_mm = 5800.0;
  Vec3 look_at;
  int rows = 128;
  int cols = 512;
  double focal_length_mm = 50.0;
  double pixel_pitch_mm = 0.01;

  void validate() const;

  Vec3 position() const;
  Vec3 forward() const;
  Vec3 right() const;
  Vec3 up() const;

  bool operator==(const CameraPose&) const = default;
};

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
};

enum class PitchPattern { constant, alternating };
enum class DistanceMode { fixed, uniform_random };

struct LayoutSpec {
  int n_views = 33;
  double view_angle_start_deg = 0.0;
  double view_angle_step_deg = 11.0;
  PitchPattern pitch_pattern = PitchPattern::constant;
  double pitch_deg = 0.0;  // constant pitch, or +/- amplitude when alternating
  DistanceMode distance_mode = DistanceMode::fixed;
  double distance_mm = 5800.0;
  double distance_min_mm = 5500.0;
  double distance_max_mm = 6500.0;
  std::uint64_t seed = 0;
  int rows = 128;
  int cols = 512;
  double fov_margin = 1.2;
  double focal_length_mm = 50.0;
};

/// Poses at start + k*step around the grid center. The pixel pitch of each pose is chosen so that
/// the grid fits the detector with `fov_margin` headroom: its bounding-sphere diameter along the
/// columns and its horizontal footprint diameter along the rows.
std::vector<CameraPose> build_layout(const LayoutSpec& spec, const GridGeometry& grid);

/// Reversing ray of pixel (row, col): starts at the pinhole and points through the mirrored
/// detector-pixel center into the scene.
Ray pixel_ray(const CameraPose& pose, int row, int col);

void to_json(nlohmann::json& j, const CameraPose& pose);
void from_json(const nlohmann::json& j, CameraPose& pose);
void to_json(nlohmann::json& j, const LayoutSpec& spec);
/// Strict: unknown keys are rejected with ParameterError.
void from_json(const nlohmann::json& j, LayoutSpec& spec);

}  // namespace wernet
