#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "synthlidar/camera.hpp"
#include "synthlidar/lidar.hpp"
#include "synthlidar/scene.hpp"

namespace synthlidar {

// Pixel (i, j) is sampled at the continuous image coordinate (i, j), so a
// real-valued pixel position x rasterizes to floor(x + 0.5).

struct RenderedImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> color;      // RGB, row-major from the top-left
  std::vector<std::uint16_t> semantic;  // class id per pixel, 0 where nothing is hit
  std::vector<std::uint16_t> instance;  // instance id per pixel
  std::string scene_id;

  std::size_t pixel(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(i);
  }
};

struct RenderOptions {
  double fog_distance = 60.0;  // m
  unsigned workers = 1;        // 0 = all cores
};

/// One primary ray per pixel. Color is the object color times a Lambert
/// factor whose light direction follows the time of day; fog blends toward
/// gray with weight 1 - exp(-d / fog_distance) and rain scales by 0.7.
/// Weather and time never touch the semantic or instance buffers.
RenderedImage render(const Scene& scene, const CameraConfig& cam, const RenderOptions& options = {});

/// Real-valued pixel where the ray at the point's grid angles meets the image.
/// Points without grid indices fall back to angles recovered from xyz; points
/// at or behind the sensor plane yield nullopt.
std::optional<PixelCoord> point_pixel(const LabeledPoint& point, const LidarConfig& config,
                                      const CameraConfig& cam);

/// Nearest pixel to a real-valued position (half-up rounding); false when
/// outside the image.
bool rasterize(const PixelCoord& px, int width, int height, int& i, int& j);

struct OverlayResult {
  RenderedImage image;       // input image with the filtered points marked in blue
  double score = 1.0;        // matched / considered; 1.0 when nothing is considered
  std::size_t considered = 0;
  std::size_t matched = 0;
};

/// Marks the calibrated pixels of every point whose class is in `classes`
/// and scores how many land on a semantic pixel of the same class. Throws
/// DataError when the image and cloud come from different scenes.
OverlayResult overlay_points(const RenderedImage& image, const PointCloud& cloud,
                             std::span<const std::int32_t> classes, const CameraConfig& cam);

std::vector<std::uint8_t> encode_ppm(const RenderedImage& image);
/// 16-bit binary PGM, big-endian samples.
std::vector<std::uint8_t> encode_pgm16(int width, int height, std::span<const std::uint16_t> data);
/// "class_id name r g b" per line for the known classes.
std::string class_palette_text();
Rgb class_display_color(std::int32_t class_id);

struct ImageFiles {
  std::filesystem::path color, semantic, instance, palette;
};

/// Writes <stem>.ppm, <stem>_semantic.pgm, <stem>_instance.pgm and
/// <stem>_palette.txt.
ImageFiles export_image(const RenderedImage& image, const std::filesystem::path& stem);

}  // namespace synthlidar
