#include "synthlidar/config_io.hpp"

#include <numbers>

#include "json.hpp"
#include "synthlidar/error.hpp"

namespace synthlidar {

namespace {

using Json = nlohmann::json;

Json parse_object(std::string_view text, const char* what) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string(what) + " config: " + e.what());
  }
  if (!j.is_object()) throw ConfigError(std::string(what) + " config must be a JSON object");
  return j;
}

double number(const Json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
  return v.get<double>();
}

int integer(const Json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError("config key '" + key + "' must be an integer");
  return v.get<int>();
}

Vec3 triple(const Json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 3) throw ConfigError("config key '" + key + "' must be [l, w, h]");
  return {number(v[0], key), number(v[1], key), number(v[2], key)};
}

}  // namespace

LidarConfig parse_lidar_config(std::string_view json_text, const LidarConfig& base) {
  const Json j = parse_object(json_text, "lidar");
  LidarConfig c = base;
  for (const auto& [key, v] : j.items()) {
    if (key == "vertical_fov") c.vertical_fov = number(v, key);
    else if (key == "vertical_res") c.vertical_res = number(v, key);
    else if (key == "horizontal_fov") c.horizontal_fov = number(v, key);
    else if (key == "horizontal_res") c.horizontal_res = number(v, key);
    else if (key == "pitch") c.pitch = number(v, key);
    else if (key == "max_range") c.max_range = number(v, key);
    else if (key == "frequency") c.frequency = number(v, key);
    else if (key == "range_noise_stddev") c.range_noise_stddev = number(v, key);
    else throw ConfigError("unknown lidar config key '" + key + "'");
  }
  c.validate();
  return c;
}

std::string lidar_config_json(const LidarConfig& c) {
  nlohmann::ordered_json j;
  j["vertical_fov"] = c.vertical_fov;
  j["vertical_res"] = c.vertical_res;
  j["horizontal_fov"] = c.horizontal_fov;
  j["horizontal_res"] = c.horizontal_res;
  j["pitch"] = c.pitch;
  j["max_range"] = c.max_range;
  j["frequency"] = c.frequency;
  j["range_noise_stddev"] = c.range_noise_stddev;
  return j.dump();
}

CameraConfig CameraSettings::at(const Pose& pose) const {
  return CameraConfig::at_pose(pose, half_vfov_deg * std::numbers::pi / 180.0, near, width, height);
}

CameraSettings parse_camera_settings(std::string_view json_text, const CameraSettings& base) {
  const Json j = parse_object(json_text, "camera");
  CameraSettings s = base;
  for (const auto& [key, v] : j.items()) {
    if (key == "width") s.width = integer(v, key);
    else if (key == "height") s.height = integer(v, key);
    else if (key == "half_vfov") s.half_vfov_deg = number(v, key);
    else if (key == "near") s.near = number(v, key);
    else throw ConfigError("unknown camera config key '" + key + "'");
  }
  s.at(Pose{}).validate();
  return s;
}

std::string camera_settings_json(const CameraSettings& s) {
  nlohmann::ordered_json j;
  j["width"] = s.width;
  j["height"] = s.height;
  j["half_vfov"] = s.half_vfov_deg;
  j["near"] = s.near;
  return j.dump();
}

BaselineParams parse_baseline_params(std::string_view json_text, const BaselineParams& base) {
  const Json j = parse_object(json_text, "baseline");
  BaselineParams p = base;
  for (const auto& [key, v] : j.items()) {
    if (key == "ground_height") p.ground_height = number(v, key);
    else if (key == "cluster_radius") p.cluster_radius = number(v, key);
    else if (key == "min_size") p.min_size = triple(v, key);
    else if (key == "max_size") p.max_size = triple(v, key);
    else throw ConfigError("unknown baseline key '" + key + "'");
  }
  p.validate();
  return p;
}

std::string baseline_params_json(const BaselineParams& p) {
  nlohmann::ordered_json j;
  j["ground_height"] = p.ground_height;
  j["cluster_radius"] = p.cluster_radius;
  j["min_size"] = {p.min_size.x, p.min_size.y, p.min_size.z};
  j["max_size"] = {p.max_size.x, p.max_size.y, p.max_size.z};
  return j.dump(2) + "\n";
}

}  // namespace synthlidar
