#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "synthlidar/accel.hpp"
#include "synthlidar/geom.hpp"

namespace synthlidar {

namespace classes {
inline constexpr std::int32_t kBackground = 0;
inline constexpr std::int32_t kCar = 1;
inline constexpr std::int32_t kPedestrian = 2;
inline constexpr std::int32_t kCyclist = 3;
inline constexpr std::int32_t kMaxKnown = 3;
}  // namespace classes

std::string_view class_name(std::int32_t class_id);

struct Rgb {
  double r = 0.0, g = 0.0, b = 0.0;
  bool operator==(const Rgb&) const = default;
};

enum class Weather { kClear, kRain, kFog };
std::string_view to_string(Weather w);
Weather parse_weather(std::string_view name);

/// A placeable mesh in its local frame: x along the length, y across, z up,
/// footprint centered on the origin with the base at z = 0.
struct Asset {
  std::string name;
  std::vector<Triangle> triangles;
  std::int32_t class_id = classes::kCar;
  Rgb base_color{};
  Vec3 footprint{};  // (length, width, height)
};

struct SceneObject {
  std::string asset;
  Vec3 position{};  // world, center of footprint at ground level
  double yaw = 0.0;  // world heading, radians
  Rgb color{};
  std::int32_t instance_id = 0;
};

/// One row of the scene's object table; triangles refer to it via
/// Triangle::object_index.
struct SceneEntity {
  ObjectLabel label{};
  Rgb color{};
  std::string name;
};

struct SceneData {
  std::string id = "scene";
  int background_id = -1;
  Weather weather = Weather::kClear;
  double time_of_day = 12.0;
  Pose sensor_pose{};
  double ground_z = 0.0;
  Aabb extent{};                       // placement region (x/y bounds are used)
  std::vector<SceneObject> objects;    // placed objects, in placement order
  std::vector<SceneEntity> entities;   // object table
  std::vector<Triangle> triangles;     // world frame
  std::vector<Aabb> obstacles;         // background pieces that block placement
  std::vector<std::string> warnings;
};

/// Immutable, cheaply copyable labeled world. Copies share geometry and the
/// lazily built acceleration index.
class Scene {
 public:
  Scene();
  /// Validates every invariant; throws ConfigError on violation.
  explicit Scene(SceneData data);

  const std::string& id() const { return data_->id; }
  int background_id() const { return data_->background_id; }
  Weather weather() const { return data_->weather; }
  double time_of_day() const { return data_->time_of_day; }
  const Pose& sensor_pose() const { return data_->sensor_pose; }
  double ground_z() const { return data_->ground_z; }
  const Aabb& extent() const { return data_->extent; }
  const std::vector<SceneObject>& objects() const { return data_->objects; }
  const std::vector<SceneEntity>& entities() const { return data_->entities; }
  const std::vector<Triangle>& triangles() const { return data_->triangles; }
  const std::vector<Aabb>& obstacles() const { return data_->obstacles; }
  const std::vector<std::string>& warnings() const { return data_->warnings; }
  const SceneData& data() const { return *data_; }

  const AccelIndex& accel() const;

  Scene with_id(std::string id) const;
  Scene with_environment(Weather weather, double time_of_day) const;

 private:
  struct Shared;
  Scene with_same_geometry(SceneData data) const;
  std::shared_ptr<const Shared> shared_;
  const SceneData* data_ = nullptr;
};

/// Places `model` at offset (x right, y forward) metres from the sensor, with
/// heading `yaw` radians relative to the sensor heading. Returns a new scene;
/// the input is unchanged. Throws ConfigError when the footprint center leaves
/// the background extent or the model is unknown. Overlap with background
/// obstacles only adds a warning.
Scene place_car(const Scene& scene, std::string_view model, double x, double y, double yaw,
                const Rgb& color);
/// Same, using the asset's base color.
Scene place_car(const Scene& scene, std::string_view model, double x, double y, double yaw);
/// Same, with an explicit instance id instead of max + 1. A clash with an
/// existing id throws ConfigError("duplicate instance_id ...").
Scene place_car(const Scene& scene, std::string_view model, double x, double y, double yaw,
                const Rgb& color, std::int32_t instance_id);

}  // namespace synthlidar
