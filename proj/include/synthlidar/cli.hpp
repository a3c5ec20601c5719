#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "synthlidar/cloud_io.hpp"
#include "synthlidar/config_io.hpp"
#include "synthlidar/dataset.hpp"
#include "synthlidar/scene.hpp"

namespace synthlidar {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,     // usage or configuration error
  kExitData = 2,       // unreadable or inconsistent input data
  kExitTolerance = 3,  // calib-check tolerance violated
};

/// Everything that influences generated bytes.
struct GenerationSettings {
  LidarConfig lidar;
  CameraSettings camera;
  std::vector<CloudFormat> formats{CloudFormat::kKittiBin};
  bool images = true;
  std::uint64_t seed = 0;

  /// Canonical text hashed into config hashes.
  std::string canonical() const;
};

/// Seed of the scan with the given index.
std::uint64_t scan_seed(std::uint64_t base_seed, std::size_t index);

/// Scans (and renders) one scene from `pose` and writes its files under
/// `root / rel_dir`, named `name`. The returned record lists paths relative
/// to `root`.
ManifestRecord write_scan(const Scene& scene, const Pose& pose, const std::string& name,
                          const GenerationSettings& settings, std::size_t index,
                          const std::string& config_hash,
                          const std::filesystem::path& root, const std::filesystem::path& rel_dir,
                          unsigned workers);

struct CalibReport {
  std::size_t samples = 0;
  double max_pixel_error = 0.0;   // |calibrate_pixel - project_point(near point)|
  double max_ray_error = 0.0;     // same for points further along each ray
  double max_near_variation = 0.0;  // calibrate_pixel change between two near distances
  double boresight_error = 0.0;   // distance of (0, 0) from the image center
  double overlay_score = 0.0;
  std::size_t overlay_points = 0;

  bool pixel_ok() const { return max_pixel_error < 1e-9 && max_ray_error < 1e-9; }
  bool near_ok() const { return max_near_variation < 1e-12; }
  bool boresight_ok() const { return boresight_error == 0.0; }
  bool overlay_ok() const { return overlay_score >= 0.98; }
  bool ok() const { return pixel_ok() && near_ok() && boresight_ok() && overlay_ok(); }
};

/// Calibration consistency over `samples` uniform random angles inside the
/// LiDAR field of view, plus the overlay score of a single unoccluded sedan
/// 10 m ahead on flat ground, seen from the camera's axes. Throws
/// ConfigError for invalid configs such as non-orthonormal camera axes.
CalibReport calibration_check(const LidarConfig& lidar, const CameraConfig& camera,
                              std::size_t samples, std::uint64_t seed);

/// Runs the command-line tool in-process. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace synthlidar
