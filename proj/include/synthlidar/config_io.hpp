#pragma once

#include <string>
#include <string_view>

#include "synthlidar/camera.hpp"
#include "synthlidar/lidar.hpp"
#include "synthlidar/segment.hpp"

namespace synthlidar {

// JSON objects for the sensor configs. Keys present in the text overwrite
// the corresponding field of `base`; unknown keys throw ConfigError.
//
// lidar:  vertical_fov, vertical_res, horizontal_fov, horizontal_res, pitch,
//         max_range, frequency, range_noise_stddev (degrees, metres, Hz)
// camera: width, height, half_vfov (degrees), near (metres)
// params: ground_height, cluster_radius, min_size [l,w,h], max_size [l,w,h]

LidarConfig parse_lidar_config(std::string_view json_text, const LidarConfig& base = {});
std::string lidar_config_json(const LidarConfig& config);

struct CameraSettings {
  int width = 1024;
  int height = 512;
  double half_vfov_deg = 28.0;
  double near = 0.15;

  /// Camera at `pose` (shared with the LiDAR).
  CameraConfig at(const Pose& pose) const;
  bool operator==(const CameraSettings&) const = default;
};

CameraSettings parse_camera_settings(std::string_view json_text, const CameraSettings& base = {});
std::string camera_settings_json(const CameraSettings& settings);

BaselineParams parse_baseline_params(std::string_view json_text, const BaselineParams& base = {});
std::string baseline_params_json(const BaselineParams& params);

}  // namespace synthlidar
