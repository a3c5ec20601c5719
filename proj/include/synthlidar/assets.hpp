#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "synthlidar/scene.hpp"

namespace synthlidar {

/// Height of the default sensor mount above the ground plane (KITTI-like).
inline constexpr double kDefaultSensorHeight = 1.73;

/// Procedurally generated static surroundings.
struct Background {
  int id = 0;
  std::string name;
  std::uint64_t seed = 0;
  double ground_z = 0.0;
  Aabb extent{};
  std::vector<Triangle> triangles;  // object_index = piece index
  std::vector<Rgb> piece_colors;
  std::vector<std::string> piece_names;
  std::vector<Aabb> obstacles;      // bounds of every non-ground piece
};

/// Box-compound car models plus placeholder pedestrian/cyclist assets.
const std::vector<Asset>& builtin_assets();
/// Throws ConfigError for unknown names.
const Asset& find_asset(std::string_view name);

/// Number of seeded urban presets (ids 0..kUrbanPresetCount-1).
inline constexpr int kUrbanPresetCount = 15;
/// Ground-only preset, used for calibration checks.
inline constexpr int kFlatPresetId = 100;

/// Seed used to generate urban preset `id`.
constexpr std::uint64_t background_seed(int id) {
  return 0x5EED'0000ull + static_cast<std::uint64_t>(id);
}

/// All presets: the urban ones followed by the flat preset.
std::vector<Background> builtin_backgrounds();
/// Generates a single preset (pure function of its id). Throws ConfigError
/// for unknown ids.
Background make_background(int id);
/// Looks up a preset by id or by name ("urban-03", "flat").
Background make_background(std::string_view name);

/// Axis-aligned box as 12 triangles tagged with `object_index`.
void append_box(std::vector<Triangle>& out, const Vec3& lo, const Vec3& hi,
                std::int32_t object_index);

/// Scene holding only `background`, sensor at `sensor_pose` (default: above
/// the origin at kDefaultSensorHeight, facing +X).
Scene make_scene(const Background& background);
Scene make_scene(const Background& background, const Pose& sensor_pose);

}  // namespace synthlidar
