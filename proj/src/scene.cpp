#include "synthlidar/scene.hpp"

#include <algorithm>
#include <mutex>
#include <optional>
#include <set>

#include "synthlidar/assets.hpp"
#include "synthlidar/error.hpp"

namespace synthlidar {

std::string_view class_name(std::int32_t class_id) {
  switch (class_id) {
    case classes::kBackground: return "background";
    case classes::kCar: return "car";
    case classes::kPedestrian: return "pedestrian";
    case classes::kCyclist: return "cyclist";
    default: return "unknown";
  }
}

std::string_view to_string(Weather w) {
  switch (w) {
    case Weather::kClear: return "clear";
    case Weather::kRain: return "rain";
    case Weather::kFog: return "fog";
  }
  return "clear";
}

Weather parse_weather(std::string_view name) {
  if (name == "clear") return Weather::kClear;
  if (name == "rain") return Weather::kRain;
  if (name == "fog") return Weather::kFog;
  throw ConfigError("unknown weather '" + std::string(name) + "' (expected clear, rain or fog)");
}

// Built on first use; shared by scenes that differ only in id or environment.
struct AccelCache {
  std::once_flag once;
  AccelIndex index;
};

struct Scene::Shared {
  SceneData data;
  std::shared_ptr<AccelCache> accel = std::make_shared<AccelCache>();
};

namespace {

void validate(const SceneData& d) {
  if (!(d.time_of_day >= 0.0 && d.time_of_day < 24.0))
    throw ConfigError("time_of_day must lie in [0, 24), got " + std::to_string(d.time_of_day));
  if (!d.sensor_pose.is_orthonormal())
    throw ConfigError("sensor pose axes are not orthonormal");
  for (const Triangle& t : d.triangles) {
    if (t.object_index < 0 || static_cast<std::size_t>(t.object_index) >= d.entities.size())
      throw ConfigError("triangle object_index " + std::to_string(t.object_index) +
                        " has no entry in the object table");
  }
  std::set<std::int32_t> ids;
  for (const SceneObject& o : d.objects) {
    if (o.instance_id <= 0)
      throw ConfigError("instance_id must be positive, got " + std::to_string(o.instance_id));
    if (!ids.insert(o.instance_id).second)
      throw ConfigError("duplicate instance_id " + std::to_string(o.instance_id));
  }
  for (const SceneEntity& e : d.entities) {
    if (e.label.instance_id == 0) continue;
    if (!ids.contains(e.label.instance_id))
      throw ConfigError("object table refers to unplaced instance_id " +
                        std::to_string(e.label.instance_id));
  }
}

}  // namespace

Scene::Scene() : Scene(SceneData{}) {}

Scene::Scene(SceneData data) {
  validate(data);
  auto shared = std::make_shared<Shared>();
  shared->data = std::move(data);
  data_ = &shared->data;
  shared_ = std::move(shared);
}

Scene Scene::with_same_geometry(SceneData data) const {
  Scene out(std::move(data));
  std::const_pointer_cast<Shared>(out.shared_)->accel = shared_->accel;
  return out;
}

const AccelIndex& Scene::accel() const {
  AccelCache& cache = *shared_->accel;
  std::call_once(cache.once, [&] {
    std::vector<ObjectLabel> labels;
    labels.reserve(data_->entities.size());
    for (const auto& e : data_->entities) labels.push_back(e.label);
    cache.index = build_accel(data_->triangles, labels);
  });
  return cache.index;
}

Scene Scene::with_id(std::string id) const {
  SceneData d = *data_;
  d.id = std::move(id);
  return with_same_geometry(std::move(d));
}

Scene Scene::with_environment(Weather weather, double time_of_day) const {
  SceneData d = *data_;
  d.weather = weather;
  d.time_of_day = time_of_day;
  return with_same_geometry(std::move(d));
}

Scene place_car(const Scene& scene, std::string_view model, double x, double y, double yaw) {
  return place_car(scene, model, x, y, yaw, find_asset(model).base_color);
}

namespace {

Scene place_impl(const Scene& scene, std::string_view model, double x, double y, double yaw,
                 const Rgb& color, std::optional<std::int32_t> instance_id) {
  const Asset& asset = find_asset(model);
  const Pose& sensor = scene.sensor_pose();
  Vec3 center = sensor.position + y * sensor.forward + x * sensor.right;
  center.z = scene.ground_z();

  const Aabb& ext = scene.extent();
  if (!ext.empty() && (center.x < ext.lo.x || center.x > ext.hi.x || center.y < ext.lo.y ||
                       center.y > ext.hi.y)) {
    throw ConfigError("placement of '" + std::string(model) + "' at offset (" + std::to_string(x) +
                      ", " + std::to_string(y) + ") lies outside the background extent");
  }

  const double heading = std::atan2(sensor.forward.y, sensor.forward.x) + yaw;
  const Pose placement = Pose::from_yaw(center, heading);

  SceneData d = scene.data();
  std::int32_t next_id = 1;
  for (const auto& o : d.objects) next_id = std::max(next_id, o.instance_id + 1);
  if (instance_id) next_id = *instance_id;
  const auto object_index = static_cast<std::int32_t>(d.entities.size());
  d.entities.push_back({{asset.class_id, next_id}, color, asset.name});
  d.objects.push_back({asset.name, center, heading, color, next_id});

  Aabb box;
  d.triangles.reserve(d.triangles.size() + asset.triangles.size());
  for (const Triangle& t : asset.triangles) {
    Triangle w{placement.to_world(t.v0), placement.to_world(t.v1), placement.to_world(t.v2),
               object_index};
    box.extend(w.bounds());
    d.triangles.push_back(w);
  }
  for (const Aabb& obstacle : d.obstacles) {
    if (box.overlaps(obstacle)) {
      d.warnings.push_back("instance " + std::to_string(next_id) + " (" + asset.name +
                           ") overlaps background geometry");
      break;
    }
  }
  return Scene(std::move(d));
}

}  // namespace

Scene place_car(const Scene& scene, std::string_view model, double x, double y, double yaw,
                const Rgb& color) {
  return place_impl(scene, model, x, y, yaw, color, std::nullopt);
}

Scene place_car(const Scene& scene, std::string_view model, double x, double y, double yaw,
                const Rgb& color, std::int32_t instance_id) {
  return place_impl(scene, model, x, y, yaw, color, instance_id);
}

}  // namespace synthlidar
