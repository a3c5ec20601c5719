#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "synthlidar/geom.hpp"
#include "synthlidar/scene.hpp"
#include "synthlidar/sweep.hpp"

namespace synthlidar {

/// Scan pattern. Angles in degrees. A positive pitch tilts the whole fan
/// downward.
struct LidarConfig {
  double vertical_fov = 26.0;
  double vertical_res = 26.0 / 63.0;     // 64 rows
  double horizontal_fov = 90.0;
  double horizontal_res = 90.0 / 511.0;  // 512 columns
  double pitch = 0.0;
  double max_range = 80.0;               // m
  double frequency = 10.0;               // Hz
  double range_noise_stddev = 0.0;       // m; 0 disables the Gaussian jitter

  /// Throws ConfigError when an invariant is violated.
  void validate() const;

  int rows() const;
  int cols() const;
  std::size_t ray_count() const {
    return static_cast<std::size_t>(rows()) * static_cast<std::size_t>(cols());
  }
  /// Half of the vertical field of view, in degrees.
  double half_vertical_fov() const { return vertical_fov / 2.0; }

  bool operator==(const LidarConfig&) const = default;
};

/// Per-ray angles in radians. Zenith is positive below the sensor's
/// horizontal plane, azimuth positive toward the sensor's left.
struct RayAngles {
  double zenith = 0.0;
  double azimuth = 0.0;
  int row = 0;
  int col = 0;
};

/// Row r has zenith pitch - vfov/2 + r * vres; column c has azimuth
/// -hfov/2 + c * hres. Endpoints are inclusive and the order is row-major.
std::vector<RayAngles> generate_ray_grid(const LidarConfig& config);

/// Angles of grid ray (row, col) in radians.
RayAngles ray_angles(const LidarConfig& config, int row, int col);

/// World-frame unit direction normalize(fwd - tan(az)/cos(zen) * right -
/// tan(zen) * up) of the sensor pose. This is the direction through the
/// calibrated near-plane point, so image calibration is exact. Throws
/// ConfigError when |zenith| or |azimuth| reaches 90 degrees.
Vec3 angles_to_direction(double zenith, double azimuth, const Pose& pose);

struct LabeledPoint {
  Vec3 xyz{};  // sensor frame: x forward, y right, z up
  double range = 0.0;
  std::int32_t row = 0;
  std::int32_t col = 0;
  std::int32_t class_id = 0;
  std::int32_t instance_id = 0;
};

struct CloudProvenance {
  std::string scene_id;
  int background_id = -1;
  std::optional<GridCell> cell;
};

struct PointCloud {
  std::vector<LabeledPoint> points;  // at most one per ray, in grid order
  LidarConfig config;
  Pose pose;
  CloudProvenance provenance;
};

struct ScanOptions {
  std::uint64_t seed = 0;  // used only by the range jitter
  unsigned workers = 1;    // 0 = all cores
};

/// Casts every grid ray from `pose` into the scene. Misses and returns beyond
/// max_range produce no point. Output does not depend on the worker count.
PointCloud scan(const Scene& scene, const LidarConfig& config, const Pose& pose,
                const ScanOptions& options = {});
/// Scans from the scene's own sensor pose.
PointCloud scan(const Scene& scene, const LidarConfig& config, const ScanOptions& options = {});

/// Dense front-view raster; cells without a return hold range 0 and class 0.
struct RangeImage {
  int rows = 0;
  int cols = 0;
  std::vector<double> range;
  std::vector<std::int32_t> class_id;

  double range_at(int r, int c) const { return range[static_cast<std::size_t>(r * cols + c)]; }
  std::int32_t class_at(int r, int c) const {
    return class_id[static_cast<std::size_t>(r * cols + c)];
  }
};

/// Throws DataError when the cloud was produced with a different config.
RangeImage range_image(const PointCloud& cloud, const LidarConfig& config);

}  // namespace synthlidar
