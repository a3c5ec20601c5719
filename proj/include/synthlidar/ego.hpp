#pragma once

#include <vector>

#include "synthlidar/geom.hpp"

namespace synthlidar {

/// Polyline driven by the ego vehicle in auto-drive collection mode.
struct EgoPath {
  std::vector<Vec3> waypoints;  // sensor positions, metres
  double speed = 10.0;          // m/s
};

/// Sensor poses taken every speed/frequency metres along the path, starting at
/// the first waypoint; count = floor(length * frequency / speed) + 1. Each
/// pose faces along its segment (horizontal heading); a pose that falls
/// exactly on a corner takes the heading of the outgoing segment.
/// Throws ConfigError for non-positive speed/frequency, repeated consecutive
/// waypoints or a zero-length path.
std::vector<Pose> ego_scan_poses(const EgoPath& path, double frequency);

}  // namespace synthlidar
