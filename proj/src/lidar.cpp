#include "synthlidar/lidar.hpp"

#include <cmath>
#include <numbers>

#include "synthlidar/error.hpp"
#include "synthlidar/parallel.hpp"
#include "synthlidar/rng.hpp"

namespace synthlidar {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// floor(fov / res) + 1, with slack for resolutions given as fov / n.
int steps(double fov, double res) {
  return static_cast<int>(std::floor(fov / res * (1.0 + 1e-12))) + 1;
}

}  // namespace

void LidarConfig::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(vertical_fov) || !finite(vertical_res) || !finite(horizontal_fov) ||
      !finite(horizontal_res) || !finite(pitch) || !finite(max_range) || !finite(frequency) ||
      !finite(range_noise_stddev))
    throw ConfigError("lidar config contains a non-finite value");
  if (!(vertical_res > 0.0 && vertical_res <= vertical_fov))
    throw ConfigError("lidar vertical_res must satisfy 0 < vertical_res <= vertical_fov");
  if (!(horizontal_res > 0.0 && horizontal_res <= horizontal_fov))
    throw ConfigError("lidar horizontal_res must satisfy 0 < horizontal_res <= horizontal_fov");
  if (!(horizontal_fov > 0.0 && horizontal_fov <= 360.0))
    throw ConfigError("lidar horizontal_fov must lie in (0, 360]");
  if (!(max_range > 0.0)) throw ConfigError("lidar max_range must be positive");
  if (!(frequency > 0.0)) throw ConfigError("lidar frequency must be positive");
  if (!(range_noise_stddev >= 0.0)) throw ConfigError("lidar range_noise_stddev must be >= 0");
}

int LidarConfig::rows() const { return steps(vertical_fov, vertical_res); }
int LidarConfig::cols() const { return steps(horizontal_fov, horizontal_res); }

RayAngles ray_angles(const LidarConfig& config, int row, int col) {
  const double zen = std::min(config.pitch - config.vertical_fov / 2.0 + row * config.vertical_res,
                              config.pitch + config.vertical_fov / 2.0);
  const double az = std::min(-config.horizontal_fov / 2.0 + col * config.horizontal_res,
                             config.horizontal_fov / 2.0);
  return {zen * kDeg, az * kDeg, row, col};
}

std::vector<RayAngles> generate_ray_grid(const LidarConfig& config) {
  config.validate();
  const int rows = config.rows();
  const int cols = config.cols();
  std::vector<RayAngles> grid;
  grid.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) grid.push_back(ray_angles(config, r, c));
  return grid;
}

Vec3 angles_to_direction(double zenith, double azimuth, const Pose& pose) {
  constexpr double kLimit = std::numbers::pi / 2.0;
  if (!(std::abs(zenith) < kLimit) || !(std::abs(azimuth) < kLimit))
    throw ConfigError("ray angles must lie strictly inside (-90, 90) degrees");
  const double lateral = std::tan(azimuth) / std::cos(zenith);
  const double vertical = std::tan(zenith);
  return normalized(pose.forward - lateral * pose.right - vertical * pose.up);
}

PointCloud scan(const Scene& scene, const LidarConfig& config, const ScanOptions& options) {
  return scan(scene, config, scene.sensor_pose(), options);
}

PointCloud scan(const Scene& scene, const LidarConfig& config, const Pose& pose,
                const ScanOptions& options) {
  if (!pose.is_orthonormal()) throw ConfigError("scan pose axes are not orthonormal");
  const std::vector<RayAngles> grid = generate_ray_grid(config);
  const AccelIndex& index = scene.accel();

  std::vector<LabeledPoint> slots(grid.size());
  std::vector<unsigned char> filled(grid.size(), 0);
  const int cols = config.cols();
  const std::size_t rows = static_cast<std::size_t>(config.rows());

  parallel_for(rows, options.workers, [&](std::size_t r) {
    for (int c = 0; c < cols; ++c) {
      const std::size_t k = r * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c);
      const RayAngles& a = grid[k];
      const Ray ray{pose.position, angles_to_direction(a.zenith, a.azimuth, pose),
                    config.max_range};
      const auto hit = index.first_hit(ray);
      if (!hit) continue;
      double range = hit->distance;
      Vec3 world = hit->point;
      if (config.range_noise_stddev > 0.0) {
        Rng rng(splitmix64(options.seed ^ splitmix64(k)));
        range += config.range_noise_stddev * rng.normal();
        if (!(range > 0.0 && range <= config.max_range)) continue;
        world = ray.at(range);
      }
      LabeledPoint& p = slots[k];
      p.xyz = pose.to_local(world);
      p.range = range;
      p.row = a.row;
      p.col = a.col;
      p.class_id = hit->class_id;
      p.instance_id = hit->instance_id;
      filled[k] = 1;
    }
  });

  PointCloud cloud;
  cloud.config = config;
  cloud.pose = pose;
  cloud.provenance.scene_id = scene.id();
  cloud.provenance.background_id = scene.background_id();
  for (std::size_t k = 0; k < slots.size(); ++k)
    if (filled[k]) cloud.points.push_back(slots[k]);
  return cloud;
}

RangeImage range_image(const PointCloud& cloud, const LidarConfig& config) {
  if (!(cloud.config == config))
    throw DataError("range_image: cloud '" + cloud.provenance.scene_id +
                    "' was scanned with a different lidar config");
  RangeImage img;
  img.rows = config.rows();
  img.cols = config.cols();
  const auto n = static_cast<std::size_t>(img.rows) * static_cast<std::size_t>(img.cols);
  img.range.assign(n, 0.0);
  img.class_id.assign(n, 0);
  for (const LabeledPoint& p : cloud.points) {
    if (p.row < 0 || p.row >= img.rows || p.col < 0 || p.col >= img.cols)
      throw DataError("range_image: point outside the ray grid");
    const auto k = static_cast<std::size_t>(p.row * img.cols + p.col);
    img.range[k] = p.range;
    img.class_id[k] = p.class_id;
  }
  return img;
}

}  // namespace synthlidar
