#pragma once

#include <optional>

#include "synthlidar/geom.hpp"
#include "synthlidar/lidar.hpp"

namespace synthlidar {

// Sign conventions shared by the whole module: zenith is positive downward,
// azimuth positive to the left, the camera's y axis points right, and pixel
// (0, 0) is the top-left corner with i growing rightward and j downward.
// This is the one combination under which the calibration formulas, the
// near-plane endpoint formula and ordinary image indexing agree.

struct CameraConfig {
  Vec3 position{};       // shared with the LiDAR center
  Vec3 forward{1, 0, 0};
  Vec3 right{0, 1, 0};
  Vec3 up{0, 0, 1};
  double half_vfov = 0.0;  // radians
  double near = 0.15;      // near-plane distance f, metres
  int width = 1024;        // R_m
  int height = 512;        // R_n

  /// Camera sharing `pose` (position and axes).
  static CameraConfig at_pose(const Pose& pose, double half_vfov, double near, int width,
                              int height);

  /// Throws ConfigError: axes not orthonormal within 1e-9, half_vfov outside
  /// (0, pi/2), non-positive near distance or resolution.
  void validate() const;

  double near_height() const;  // n = 2 f tan(gamma)
  double near_width() const;   // m = n * R_m / R_n
  Vec3 near_center() const { return position + near * forward; }
  double half_hfov() const;    // atan(m / (2 f))
  Pose pose() const { return {position, forward, right, up}; }
};

/// True when gamma >= vfov/2 and the horizontal half-FOV >= hfov/2.
bool contains_lidar_fov(const CameraConfig& cam, const LidarConfig& lidar);

struct PixelCoord {
  double i = 0.0;  // from the left edge
  double j = 0.0;  // from the top edge
};

/// Pixel of the ray with the given zenith/azimuth (radians). Real valued;
/// rays outside the frustum give out-of-range coordinates. Independent of
/// the near distance.
PixelCoord calibrate_pixel(double zenith, double azimuth, const CameraConfig& cam);

struct LaserEndpoints {
  Vec3 near_point;  // on the near plane
  Vec3 far_point;   // position + k * (near_point - position)
};

/// Near-plane point of the ray and a far point k times further out. Throws
/// ConfigError for angles at or beyond 90 degrees.
LaserEndpoints laser_endpoints(double zenith, double azimuth, const CameraConfig& cam, double k);

/// Default far coefficient: 10 * max_range / near.
double default_far_coefficient(const LidarConfig& lidar, const CameraConfig& cam);

/// Perspective projection; std::nullopt for points at or behind the camera
/// plane (u <= 0).
std::optional<PixelCoord> project_point(const Vec3& point, const CameraConfig& cam);

}  // namespace synthlidar
