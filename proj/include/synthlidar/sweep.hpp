#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "synthlidar/scene.hpp"

namespace synthlidar {

/// Position of a sweep sample on the X-Y grid: indices into SweepSpec::xs and
/// SweepSpec::ys.
struct GridCell {
  int ix = 0;
  int iy = 0;
  auto operator<=>(const GridCell&) const = default;
};

/// Sample lists for the scene modification space. Offsets are relative to
/// the sensor: x to the right, y forward (metres); yaws in radians relative to
/// the sensor heading. A color of std::nullopt means "the asset's own color".
struct SweepSpec {
  enum class Mode { kCartesian, kList };

  std::vector<std::string> car_models{"sedan"};
  std::vector<double> xs{0.0};
  std::vector<double> ys{10.0};
  std::vector<double> yaws{0.0};
  std::vector<int> counts{1};
  std::vector<int> background_ids{0};
  std::vector<std::optional<Rgb>> colors{std::nullopt};
  std::vector<Weather> weathers{Weather::kClear};
  std::vector<double> times{12.0};
  Mode mode = Mode::kCartesian;
  /// Forward spacing between cars when a sample asks for more than one.
  double count_spacing = 7.0;

  struct Explicit {
    std::string model = "sedan";
    int ix = 0, iy = 0;  // cell indices into xs / ys
    double yaw = 0.0;
    int count = 1;
    int background_id = 0;
    std::optional<Rgb> color;
    Weather weather = Weather::kClear;
    double time = 12.0;
  };
  std::vector<Explicit> scenes;  // used in kList mode
};

/// One fully specified point of the modification space.
struct SweepPoint {
  std::size_t index = 0;
  std::string id;
  std::string model;
  GridCell cell;
  double x = 0.0, y = 0.0, yaw = 0.0;
  int count = 1;
  int background_id = 0;
  std::optional<Rgb> color;
  Weather weather = Weather::kClear;
  double time = 12.0;
};

struct SweepScene {
  Scene scene;
  SweepPoint point;
};

/// Throws ConfigError when a list is empty or a value is out of range.
void validate(const SweepSpec& spec);

/// Enumerates sample points without building geometry. Cartesian order is
/// lexicographic over (background, model, count, yaw, color, weather, time,
/// y, x) with x varying fastest.
std::vector<SweepPoint> sweep_points(const SweepSpec& spec);

/// Builds the scene for one point. The base scene is reused when the point's
/// background matches it; other backgrounds are generated from presets with
/// the base scene's sensor pose.
Scene instantiate_point(const SweepSpec& spec, const SweepPoint& point, const Scene& base_scene);

std::vector<SweepScene> instantiate_sweep(const SweepSpec& spec, const Scene& base_scene);

}  // namespace synthlidar
