#include "synthlidar/ego.hpp"

#include <cmath>

#include "synthlidar/error.hpp"

namespace synthlidar {

std::vector<Pose> ego_scan_poses(const EgoPath& path, double frequency) {
  if (!(frequency > 0.0)) throw ConfigError("scan frequency must be positive");
  if (!(path.speed > 0.0)) throw ConfigError("ego speed must be positive");
  if (path.waypoints.size() < 2) throw ConfigError("ego path is zero-length (needs two waypoints)");

  std::vector<double> seg_len;
  std::vector<Pose> seg_pose;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < path.waypoints.size(); ++i) {
    const Vec3 d = path.waypoints[i + 1] - path.waypoints[i];
    const double len = norm(d);
    if (len == 0.0) throw ConfigError("consecutive ego waypoints " + std::to_string(i) + " and " +
                                      std::to_string(i + 1) + " coincide");
    const double horizontal = std::hypot(d.x, d.y);
    if (horizontal == 0.0) throw ConfigError("ego path segment " + std::to_string(i) + " is vertical");
    seg_len.push_back(len);
    seg_pose.push_back(Pose::from_yaw(path.waypoints[i], std::atan2(d.y, d.x)));
    total += len;
  }

  const double spacing = path.speed / frequency;
  // Relative slack keeps an exact multiple (100 m at 1 m spacing) from being
  // floored away by rounding.
  const auto count =
      static_cast<std::size_t>(std::floor(total * frequency / path.speed * (1.0 + 1e-12))) + 1;

  std::vector<Pose> poses;
  poses.reserve(count);
  std::size_t seg = 0;
  double seg_start = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const double s = std::min(static_cast<double>(k) * spacing, total);
    while (seg + 1 < seg_len.size() && s >= seg_start + seg_len[seg] * (1.0 - 1e-12)) {
      seg_start += seg_len[seg];
      ++seg;
    }
    const double along = std::min(std::max(s - seg_start, 0.0), seg_len[seg]);
    const Vec3& a = path.waypoints[seg];
    const Vec3& b = path.waypoints[seg + 1];
    Pose p = seg_pose[seg];
    p.position = a + (b - a) * (along / seg_len[seg]);
    poses.push_back(p);
  }
  return poses;
}

}  // namespace synthlidar
