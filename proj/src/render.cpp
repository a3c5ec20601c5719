#include "synthlidar/render.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "synthlidar/cloud_io.hpp"
#include "synthlidar/error.hpp"
#include "synthlidar/parallel.hpp"

namespace synthlidar {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kAmbient = 0.25;
constexpr double kRainFactor = 0.7;
constexpr double kCameraRange = 1e6;
constexpr Rgb kSky{0.53, 0.81, 0.92};
constexpr Rgb kFogGray{0.7, 0.7, 0.7};

// Sun elevation peaks at noon and is negative between 18:00 and 06:00; the
// azimuth sweeps a full turn per day.
Vec3 sun_direction(double time_of_day, double& elevation) {
  elevation = kPi / 2.0 * std::sin(kPi * (time_of_day - 6.0) / 12.0);
  const double az = kPi * (time_of_day - 12.0) / 12.0;
  return {std::cos(elevation) * std::cos(az), std::cos(elevation) * std::sin(az),
          std::sin(elevation)};
}

Rgb scale(const Rgb& c, double s) { return {c.r * s, c.g * s, c.b * s}; }
Rgb mix(const Rgb& a, const Rgb& b, double w) {
  return {a.r + (b.r - a.r) * w, a.g + (b.g - a.g) * w, a.b + (b.b - a.b) * w};
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

void put_u16_be(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

std::uint16_t clamp_u16(std::int32_t v) {
  return static_cast<std::uint16_t>(std::clamp<std::int32_t>(v, 0, 0xFFFF));
}

}  // namespace

RenderedImage render(const Scene& scene, const CameraConfig& cam, const RenderOptions& options) {
  cam.validate();
  if (!(options.fog_distance > 0.0)) throw ConfigError("fog distance must be positive");

  RenderedImage img;
  img.width = cam.width;
  img.height = cam.height;
  img.scene_id = scene.id();
  const auto count = static_cast<std::size_t>(cam.width) * static_cast<std::size_t>(cam.height);
  img.color.assign(count * 3, 0);
  img.semantic.assign(count, 0);
  img.instance.assign(count, 0);

  double elevation = 0.0;
  const Vec3 sun = sun_direction(scene.time_of_day(), elevation);
  const double daylight = std::max(0.0, std::sin(elevation));
  const Weather weather = scene.weather();
  const AccelIndex& index = scene.accel();
  const auto& entities = scene.entities();

  const double m = cam.near_width();
  const double n = cam.near_height();
  const Vec3 center = cam.near_center();

  parallel_for(static_cast<std::size_t>(cam.height), options.workers, [&](std::size_t row) {
    const int j = static_cast<int>(row);
    for (int i = 0; i < cam.width; ++i) {
      const Vec3 near_point = center + (i * m / cam.width - m / 2.0) * cam.right -
                              (j * n / cam.height - n / 2.0) * cam.up;
      const Ray ray{cam.position, normalized(near_point - cam.position), kCameraRange};
      const auto hit = index.first_hit(ray);

      Rgb c;
      if (hit) {
        const auto& entity = entities[static_cast<std::size_t>(hit->object_index)];
        const double lambert = std::abs(dot(hit->normal, sun)) * (daylight > 0.0 ? 1.0 : 0.0);
        c = scale(entity.color, kAmbient + (1.0 - kAmbient) * lambert);
        if (weather == Weather::kFog)
          c = mix(c, kFogGray, 1.0 - std::exp(-hit->distance / options.fog_distance));
        const std::size_t p = img.pixel(i, j);
        img.semantic[p] = clamp_u16(hit->class_id);
        img.instance[p] = clamp_u16(hit->instance_id);
      } else {
        c = weather == Weather::kFog ? kFogGray : scale(kSky, kAmbient + (1.0 - kAmbient) * daylight);
      }
      if (weather == Weather::kRain) c = scale(c, kRainFactor);

      const std::size_t p = img.pixel(i, j) * 3;
      img.color[p] = to_byte(c.r);
      img.color[p + 1] = to_byte(c.g);
      img.color[p + 2] = to_byte(c.b);
    }
  });
  return img;
}

std::optional<PixelCoord> point_pixel(const LabeledPoint& point, const LidarConfig& config,
                                      const CameraConfig& cam) {
  if (point.row >= 0 && point.col >= 0) {
    const RayAngles a = ray_angles(config, point.row, point.col);
    return calibrate_pixel(a.zenith, a.azimuth, cam);
  }
  // Invert the direction formula: x = 1, y = -tan(az)/cos(zen), z = -tan(zen).
  const Vec3& q = point.xyz;
  if (!(q.x > 0.0)) return std::nullopt;
  const double zenith = std::atan(-q.z / q.x);
  const double azimuth = std::atan(-q.y / q.x * std::cos(zenith));
  return calibrate_pixel(zenith, azimuth, cam);
}

bool rasterize(const PixelCoord& px, int width, int height, int& i, int& j) {
  const double fi = std::floor(px.i + 0.5);
  const double fj = std::floor(px.j + 0.5);
  if (!(fi >= 0.0 && fi < width && fj >= 0.0 && fj < height)) return false;
  i = static_cast<int>(fi);
  j = static_cast<int>(fj);
  return true;
}

OverlayResult overlay_points(const RenderedImage& image, const PointCloud& cloud,
                             std::span<const std::int32_t> classes, const CameraConfig& cam) {
  if (image.scene_id != cloud.provenance.scene_id)
    throw DataError("overlay: image of scene '" + image.scene_id + "' does not match cloud of scene '" +
                    cloud.provenance.scene_id + "'");
  if (image.width != cam.width || image.height != cam.height)
    throw DataError("overlay: image size does not match the camera resolution");

  OverlayResult out;
  out.image = image;
  for (const LabeledPoint& p : cloud.points) {
    if (std::find(classes.begin(), classes.end(), p.class_id) == classes.end()) continue;
    ++out.considered;
    const auto px = point_pixel(p, cloud.config, cam);
    int i = 0, j = 0;
    if (!px || !rasterize(*px, image.width, image.height, i, j)) continue;
    const std::size_t k = image.pixel(i, j);
    if (image.semantic[k] == p.class_id) ++out.matched;
    out.image.color[3 * k] = 0;
    out.image.color[3 * k + 1] = 0;
    out.image.color[3 * k + 2] = 255;
  }
  if (out.considered > 0)
    out.score = static_cast<double>(out.matched) / static_cast<double>(out.considered);
  return out;
}

std::vector<std::uint8_t> encode_ppm(const RenderedImage& image) {
  const std::string header =
      "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.color.begin(), image.color.end());
  return out;
}

std::vector<std::uint8_t> encode_pgm16(int width, int height, std::span<const std::uint16_t> data) {
  if (data.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw DataError("pgm: buffer size does not match the image size");
  const std::string header =
      "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n65535\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + data.size() * 2);
  for (std::uint16_t v : data) put_u16_be(out, v);
  return out;
}

Rgb class_display_color(std::int32_t class_id) {
  switch (class_id) {
    case classes::kCar: return {0.0, 0.0, 1.0};
    case classes::kPedestrian: return {1.0, 0.0, 0.0};
    case classes::kCyclist: return {0.0, 1.0, 0.0};
    default: return {0.0, 0.0, 0.0};
  }
}

std::string class_palette_text() {
  std::string text = "# class_id name r g b\n";
  for (std::int32_t c = 0; c <= classes::kMaxKnown; ++c) {
    const Rgb rgb = class_display_color(c);
    text += std::to_string(c) + ' ' + std::string(class_name(c)) + ' ' +
            std::to_string(to_byte(rgb.r)) + ' ' + std::to_string(to_byte(rgb.g)) + ' ' +
            std::to_string(to_byte(rgb.b)) + '\n';
  }
  return text;
}

ImageFiles export_image(const RenderedImage& image, const std::filesystem::path& stem) {
  ImageFiles files;
  files.color = stem.string() + ".ppm";
  files.semantic = stem.string() + "_semantic.pgm";
  files.instance = stem.string() + "_instance.pgm";
  files.palette = stem.string() + "_palette.txt";
  write_bytes(files.color, encode_ppm(image));
  write_bytes(files.semantic, encode_pgm16(image.width, image.height, image.semantic));
  write_bytes(files.instance, encode_pgm16(image.width, image.height, image.instance));
  const std::string palette = class_palette_text();
  write_bytes(files.palette, std::vector<std::uint8_t>(palette.begin(), palette.end()));
  return files;
}

}  // namespace synthlidar
