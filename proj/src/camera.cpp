#include "synthlidar/camera.hpp"

#include <cmath>
#include <numbers>

#include "synthlidar/error.hpp"

namespace synthlidar {

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
}

CameraConfig CameraConfig::at_pose(const Pose& pose, double half_vfov, double near, int width,
                                   int height) {
  CameraConfig c;
  c.position = pose.position;
  c.forward = pose.forward;
  c.right = pose.right;
  c.up = pose.up;
  c.half_vfov = half_vfov;
  c.near = near;
  c.width = width;
  c.height = height;
  return c;
}

void CameraConfig::validate() const {
  if (!pose().is_orthonormal(1e-9)) throw ConfigError("camera axes are not orthonormal");
  if (!(half_vfov > 0.0 && half_vfov < std::numbers::pi / 2.0))
    throw ConfigError("camera half vertical FOV must lie in (0, 90) degrees");
  if (!(near > 0.0) || !std::isfinite(near)) throw ConfigError("camera near distance must be positive");
  if (width <= 0 || height <= 0) throw ConfigError("camera resolution must be positive");
}

double CameraConfig::near_height() const { return 2.0 * near * std::tan(half_vfov); }
double CameraConfig::near_width() const {
  return near_height() * static_cast<double>(width) / static_cast<double>(height);
}
double CameraConfig::half_hfov() const { return std::atan(near_width() / (2.0 * near)); }

bool contains_lidar_fov(const CameraConfig& cam, const LidarConfig& lidar) {
  return cam.half_vfov >= lidar.half_vertical_fov() * kDeg &&
         cam.half_hfov() >= lidar.horizontal_fov / 2.0 * kDeg;
}

PixelCoord calibrate_pixel(double zenith, double azimuth, const CameraConfig& cam) {
  // i = (Rm/m)(f tan(gamma) m/n - f tan(az)/cos(zen)) and
  // j = (Rn/n)(f tan(gamma) + f tan(zen)), with the constant terms reduced to
  // Rm/2 and Rn/2 (n = 2 f tan(gamma)) so the boresight lands exactly on the
  // image center.
  const double f = cam.near;
  const double rm = cam.width;
  const double rn = cam.height;
  PixelCoord px;
  px.i = rm / 2.0 - rm / cam.near_width() * (f / std::cos(zenith) * std::tan(azimuth));
  px.j = rn / 2.0 + rn / cam.near_height() * (f * std::tan(zenith));
  return px;
}

LaserEndpoints laser_endpoints(double zenith, double azimuth, const CameraConfig& cam, double k) {
  constexpr double kLimit = std::numbers::pi / 2.0;
  if (!(std::abs(zenith) < kLimit) || !(std::abs(azimuth) < kLimit))
    throw ConfigError("ray angles must lie strictly inside (-90, 90) degrees");
  const double f = cam.near;
  LaserEndpoints e;
  e.near_point = cam.position + f * cam.forward - f / std::cos(zenith) * std::tan(azimuth) * cam.right -
                 f * std::tan(zenith) * cam.up;
  e.far_point = cam.position + k * (e.near_point - cam.position);
  return e;
}

double default_far_coefficient(const LidarConfig& lidar, const CameraConfig& cam) {
  return 10.0 * lidar.max_range / cam.near;
}

std::optional<PixelCoord> project_point(const Vec3& point, const CameraConfig& cam) {
  const Vec3 d = point - cam.position;
  const double u = dot(d, cam.forward);
  if (!(u > 0.0)) return std::nullopt;
  const double v = dot(d, cam.right);
  const double w = dot(d, cam.up);
  const double f = cam.near;
  PixelCoord px;
  px.i = cam.width / 2.0 + cam.width / cam.near_width() * (f * v / u);
  px.j = cam.height / 2.0 - cam.height / cam.near_height() * (f * w / u);
  return px;
}

}  // namespace synthlidar
