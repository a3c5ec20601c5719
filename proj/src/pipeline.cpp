#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "synthlidar/assets.hpp"
#include "synthlidar/cli.hpp"
#include "synthlidar/error.hpp"
#include "synthlidar/render.hpp"
#include "synthlidar/rng.hpp"

namespace synthlidar {

namespace fs = std::filesystem;

std::string GenerationSettings::canonical() const {
  std::string s = "lidar=" + lidar_config_json(lidar) + ";camera=" + camera_settings_json(camera) +
                  ";formats=";
  for (CloudFormat f : formats) s += std::string(to_string(f)) + ',';
  s += ";images=" + std::to_string(images ? 1 : 0) + ";seed=" + std::to_string(seed);
  return s;
}

std::uint64_t scan_seed(std::uint64_t base_seed, std::size_t index) {
  return splitmix64(base_seed ^ splitmix64(static_cast<std::uint64_t>(index) + 1));
}

ManifestRecord write_scan(const Scene& scene, const Pose& pose, const std::string& name,
                          const GenerationSettings& settings, std::size_t index,
                          const std::string& config_hash, const fs::path& root, const fs::path& rel_dir,
                          unsigned workers) {
  ManifestRecord rec;
  rec.index = index;
  rec.scene_id = name;
  rec.background_id = scene.background_id();
  rec.weather = scene.weather();
  rec.time_of_day = scene.time_of_day();
  rec.seed = scan_seed(settings.seed, index);
  rec.config_hash = config_hash;
  rec.sensor_pose = pose;
  rec.count = static_cast<int>(scene.objects().size());
  if (!scene.objects().empty()) {
    rec.model = scene.objects().front().asset;
    rec.yaw_deg = scene.objects().front().yaw * 180.0 / std::numbers::pi;
  }

  fs::create_directories(root / rel_dir);
  const fs::path rel_stem = rel_dir / name;
  auto rel = [&](const fs::path& p) { return fs::relative(p, root).generic_string(); };

  const PointCloud cloud = scan(scene, settings.lidar, pose, {rec.seed, workers});
  rec.point_count = cloud.points.size();
  for (CloudFormat f : settings.formats) {
    const ExportedFiles files = export_cloud(cloud, f, root / rel_stem);
    switch (f) {
      case CloudFormat::kKittiBin:
        rec.files["cloud"] = rel(files.primary);
        rec.files["labels"] = rel(files.labels);
        break;
      case CloudFormat::kPly: rec.files["ply"] = rel(files.primary); break;
      case CloudFormat::kCsv: rec.files["csv"] = rel(files.primary); break;
    }
  }
  if (settings.images) {
    const RenderedImage img = render(scene, settings.camera.at(pose), {60.0, workers});
    const ImageFiles files = export_image(img, root / rel_stem);
    rec.files["image"] = rel(files.color);
    rec.files["semantic"] = rel(files.semantic);
    rec.files["instance"] = rel(files.instance);
    rec.files["palette"] = rel(files.palette);
  }
  return rec;
}

CalibReport calibration_check(const LidarConfig& lidar, const CameraConfig& camera,
                              std::size_t samples, std::uint64_t seed) {
  lidar.validate();
  camera.validate();
  constexpr double kDeg = std::numbers::pi / 180.0;
  CalibReport rep;
  rep.samples = samples;

  CameraConfig other = camera;
  other.near = camera.near * 3.7;
  const double k = default_far_coefficient(lidar, camera);
  const double zlo = (lidar.pitch - lidar.vertical_fov / 2.0) * kDeg;
  const double zhi = (lidar.pitch + lidar.vertical_fov / 2.0) * kDeg;
  const double alo = -lidar.horizontal_fov / 2.0 * kDeg;
  const double ahi = lidar.horizontal_fov / 2.0 * kDeg;

  auto err = [](const PixelCoord& a, const PixelCoord& b) { return std::hypot(a.i - b.i, a.j - b.j); };
  Rng rng(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    const double zen = rng.uniform(zlo, zhi);
    const double az = rng.uniform(alo, ahi);
    const PixelCoord px = calibrate_pixel(zen, az, camera);
    const LaserEndpoints e = laser_endpoints(zen, az, camera, k);
    if (const auto p = project_point(e.near_point, camera))
      rep.max_pixel_error = std::max(rep.max_pixel_error, err(px, *p));
    else
      rep.max_pixel_error = std::numeric_limits<double>::infinity();
    for (const Vec3& q : {e.far_point, camera.position + 7.3 * (e.near_point - camera.position)}) {
      const auto p = project_point(q, camera);
      rep.max_ray_error = std::max(rep.max_ray_error, p ? err(px, *p) : std::numeric_limits<double>::infinity());
    }
    rep.max_near_variation = std::max(rep.max_near_variation, err(px, calibrate_pixel(zen, az, other)));
  }
  const PixelCoord center = calibrate_pixel(0.0, 0.0, camera);
  rep.boresight_error = err(center, {camera.width / 2.0, camera.height / 2.0});

  const Background flat = make_background(kFlatPresetId);
  const Pose pose{{0.0, 0.0, flat.ground_z + kDefaultSensorHeight}, camera.forward, camera.right, camera.up};
  const Scene scene = place_car(make_scene(flat, pose), "sedan", 0.0, 10.0, 0.0).with_id("calibration");
  CameraConfig cam = camera;
  cam.position = pose.position;
  const PointCloud cloud = scan(scene, lidar, pose);
  const RenderedImage img = render(scene, cam);
  const std::int32_t car[] = {classes::kCar};
  const OverlayResult overlay = overlay_points(img, cloud, car, cam);
  rep.overlay_score = overlay.score;
  rep.overlay_points = overlay.considered;
  return rep;
}

}  // namespace synthlidar
