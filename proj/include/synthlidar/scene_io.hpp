#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "synthlidar/ego.hpp"
#include "synthlidar/scene.hpp"
#include "synthlidar/sweep.hpp"

namespace synthlidar {

// JSON file formats, documented in docs/file_formats.md. Lengths are metres,
// angles are degrees in files and radians in memory. Unknown keys are
// rejected; errors are ConfigError with a "line N" or key-path diagnostic.

Scene parse_scene(std::string_view json_text, std::string_view default_id = "scene");
/// Scene id defaults to the file stem.
Scene load_scene(const std::filesystem::path& path);

/// A sweep file may embed the base scene under "base"; otherwise the base is
/// the first listed background with the default sensor mount.
struct SweepFile {
  SweepSpec spec;
  Scene base;
};
SweepFile parse_sweep(std::string_view json_text);
SweepFile load_sweep(const std::filesystem::path& path);

EgoPath parse_ego_path(std::string_view json_text);
EgoPath load_ego_path(const std::filesystem::path& path);

/// Canonical text of a file's parsed JSON (sorted keys, no whitespace), used
/// for configuration hashing.
std::string canonical_json(std::string_view json_text);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace synthlidar
