#include "synthlidar/scene_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

#include "synthlidar/assets.hpp"
#include "synthlidar/error.hpp"

namespace synthlidar {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte),
                                     '\n');
    throw ConfigError("JSON parse error at line " + std::to_string(line) + ": " + e.what());
  }
}

// Typed access to a JSON object with a key path for diagnostics.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError((path_.empty() ? std::string("<root>") : path_) + ": " + what);
  }

  void allow_only(std::initializer_list<std::string_view> keys) const {
    for (const auto& [k, v] : j_.items()) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end())
        throw ConfigError(sub(k) + ": unknown key");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& raw(const char* key) const {
    if (!has(key)) fail(std::string("missing required key '") + key + "'");
    return j_.at(key);
  }
  std::string sub(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  double number(const char* key) const {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(sub(key) + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(sub(key) + ": expected a finite number");
    return d;
  }
  double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }
  int integer(const char* key) const {
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(sub(key) + ": expected an integer");
    return v.get<int>();
  }
  std::string string(const char* key) const {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(sub(key) + ": expected a string");
    return v.get<std::string>();
  }
  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(sub(key) + ": expected true or false");
    return v.get<bool>();
  }
  const json& array(const char* key) const {
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(sub(key) + ": expected an array");
    return v;
  }

 private:
  const json& j_;
  std::string path_;
};

Vec3 vec3_of(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
      !v[2].is_number())
    throw ConfigError(path + ": expected [x, y, z]");
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

Rgb rgb_of(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(path + ": expected [r, g, b]");
  double c[3];
  for (int i = 0; i < 3; ++i) {
    if (!v[i].is_number()) throw ConfigError(path + ": expected [r, g, b]");
    c[i] = v[i].get<double>();
    if (!(c[i] >= 0.0 && c[i] <= 1.0)) throw ConfigError(path + ": color components must be in [0, 1]");
  }
  return {c[0], c[1], c[2]};
}

Background inline_background(const json& j, const std::string& path) {
  Node n(j, path);
  n.allow_only({"name", "ground_z", "ground", "extent", "boxes"});
  Background bg;
  bg.id = -1;
  bg.name = n.has("name") ? n.string("name") : "inline";
  bg.ground_z = n.number("ground_z", 0.0);
  const json& ext = n.array("extent");
  if (ext.size() != 4) throw ConfigError(n.sub("extent") + ": expected [xmin, xmax, ymin, ymax]");
  for (const auto& e : ext)
    if (!e.is_number()) throw ConfigError(n.sub("extent") + ": expected numbers");
  bg.extent.lo = {ext[0].get<double>(), ext[2].get<double>(), bg.ground_z - 1.0};
  bg.extent.hi = {ext[1].get<double>(), ext[3].get<double>(), bg.ground_z + 40.0};
  if (!(bg.extent.lo.x < bg.extent.hi.x && bg.extent.lo.y < bg.extent.hi.y))
    throw ConfigError(n.sub("extent") + ": min must be below max");

  if (n.boolean("ground", true)) {
    const Vec3 a{bg.extent.lo.x, bg.extent.lo.y, bg.ground_z};
    const Vec3 b{bg.extent.hi.x, bg.extent.lo.y, bg.ground_z};
    const Vec3 c{bg.extent.hi.x, bg.extent.hi.y, bg.ground_z};
    const Vec3 d{bg.extent.lo.x, bg.extent.hi.y, bg.ground_z};
    bg.triangles.push_back({a, b, c, 0});
    bg.triangles.push_back({a, c, d, 0});
    bg.piece_colors.push_back({0.35, 0.35, 0.37});
    bg.piece_names.push_back("ground");
  }
  if (n.has("boxes")) {
    const json& boxes = n.array("boxes");
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      const std::string bp = n.sub("boxes") + "[" + std::to_string(i) + "]";
      Node b(boxes[i], bp);
      b.allow_only({"min", "max", "color", "name"});
      const Vec3 lo = vec3_of(b.raw("min"), b.sub("min"));
      const Vec3 hi = vec3_of(b.raw("max"), b.sub("max"));
      if (!(lo.x < hi.x && lo.y < hi.y && lo.z < hi.z)) throw ConfigError(bp + ": min must be below max");
      const auto piece = static_cast<std::int32_t>(bg.piece_colors.size());
      append_box(bg.triangles, lo, hi, piece);
      bg.piece_colors.push_back(b.has("color") ? rgb_of(b.raw("color"), b.sub("color"))
                                               : Rgb{0.6, 0.6, 0.6});
      bg.piece_names.push_back(b.has("name") ? b.string("name") : "box");
      bg.obstacles.push_back({lo, hi});
    }
  }
  return bg;
}

Background background_of(const json& v, const std::string& path) {
  if (v.is_number_integer()) return make_background(v.get<int>());
  if (v.is_string()) return make_background(std::string_view(v.get_ref<const std::string&>()));
  if (v.is_object()) return inline_background(v, path);
  throw ConfigError(path + ": expected a preset id, preset name or inline object");
}

Scene scene_of(const json& j, const std::string& path, std::string_view default_id) {
  Node n(j, path);
  n.allow_only({"id", "background", "sensor", "objects", "weather", "time_of_day"});
  const Background bg = background_of(n.raw("background"), n.sub("background"));

  Pose sensor = Pose::from_yaw({0.0, 0.0, bg.ground_z + kDefaultSensorHeight}, 0.0);
  if (n.has("sensor")) {
    Node s(n.raw("sensor"), n.sub("sensor"));
    s.allow_only({"x", "y", "z", "yaw"});
    sensor = Pose::from_yaw({s.number("x", 0.0), s.number("y", 0.0),
                             s.number("z", bg.ground_z + kDefaultSensorHeight)},
                            s.number("yaw", 0.0) * kDeg);
  }
  Scene scene = make_scene(bg, sensor);

  if (n.has("objects")) {
    const json& objects = n.array("objects");
    for (std::size_t i = 0; i < objects.size(); ++i) {
      Node o(objects[i], n.sub("objects") + "[" + std::to_string(i) + "]");
      o.allow_only({"asset", "x", "y", "yaw", "color", "instance_id"});
      const std::string asset = o.string("asset");
      const Asset& a = find_asset(asset);
      const Rgb color = o.has("color") ? rgb_of(o.raw("color"), o.sub("color")) : a.base_color;
      const double yaw = o.number("yaw", 0.0) * kDeg;
      try {
        if (o.has("instance_id")) {
          scene = place_car(scene, asset, o.number("x"), o.number("y"), yaw, color,
                            o.integer("instance_id"));
        } else {
          scene = place_car(scene, asset, o.number("x"), o.number("y"), yaw, color);
        }
      } catch (const ConfigError& e) {
        o.fail(e.what());
      }
    }
  }

  const Weather weather = n.has("weather") ? parse_weather(n.string("weather")) : Weather::kClear;
  const double time = n.number("time_of_day", 12.0);
  if (!(time >= 0.0 && time < 24.0)) throw ConfigError(n.sub("time_of_day") + ": must lie in [0, 24)");
  std::string id = n.has("id") ? n.string("id") : std::string(default_id);
  return scene.with_environment(weather, time).with_id(std::move(id));
}

std::vector<double> numbers_of(const json& v, const std::string& path) {
  if (v.is_object()) {
    Node r(v, path);
    r.allow_only({"from", "to", "step"});
    const double from = r.number("from"), to = r.number("to"), step = r.number("step", 1.0);
    if (!(step > 0.0) || to < from) throw ConfigError(path + ": need from <= to and step > 0");
    const auto n = static_cast<std::size_t>(std::floor((to - from) / step * (1.0 + 1e-12))) + 1;
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(from + step * static_cast<double>(i));
    return out;
  }
  if (!v.is_array()) throw ConfigError(path + ": expected an array or {from, to, step}");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(path + ": expected numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

int background_id_of(const json& v, const std::string& path) {
  if (v.is_number_integer()) {
    make_background(v.get<int>());  // validates
    return v.get<int>();
  }
  if (v.is_string()) return make_background(std::string_view(v.get_ref<const std::string&>())).id;
  throw ConfigError(path + ": expected a preset id or name");
}

std::optional<Rgb> color_option_of(const json& v, const std::string& path) {
  if (v.is_string() && v.get<std::string>() == "default") return std::nullopt;
  return rgb_of(v, path);
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Scene parse_scene(std::string_view json_text, std::string_view default_id) {
  return scene_of(parse_json(json_text), "", default_id);
}

Scene load_scene(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_scene(text, path.stem().string());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

SweepFile parse_sweep(std::string_view json_text) {
  const json j = parse_json(json_text);
  Node n(j, "");
  n.allow_only({"base", "mode", "car_models", "xs", "ys", "yaws", "counts", "backgrounds", "colors",
                "weathers", "times", "count_spacing", "scenes"});
  SweepSpec spec;
  if (n.has("mode")) {
    const std::string mode = n.string("mode");
    if (mode == "cartesian") spec.mode = SweepSpec::Mode::kCartesian;
    else if (mode == "list") spec.mode = SweepSpec::Mode::kList;
    else throw ConfigError("mode: expected 'cartesian' or 'list'");
  }
  if (n.has("car_models")) {
    spec.car_models.clear();
    for (const auto& m : n.array("car_models")) {
      if (!m.is_string()) throw ConfigError("car_models: expected strings");
      spec.car_models.push_back(m.get<std::string>());
    }
  }
  if (n.has("xs")) spec.xs = numbers_of(n.raw("xs"), "xs");
  if (n.has("ys")) spec.ys = numbers_of(n.raw("ys"), "ys");
  if (n.has("yaws")) {
    spec.yaws = numbers_of(n.raw("yaws"), "yaws");
    for (double& y : spec.yaws) y *= kDeg;
  }
  if (n.has("counts")) {
    spec.counts.clear();
    for (const auto& c : n.array("counts")) {
      if (!c.is_number_integer()) throw ConfigError("counts: expected integers");
      spec.counts.push_back(c.get<int>());
    }
  }
  if (n.has("backgrounds")) {
    spec.background_ids.clear();
    const json& b = n.raw("backgrounds");
    if (b.is_object()) {
      for (double v : numbers_of(b, "backgrounds")) spec.background_ids.push_back(static_cast<int>(v));
    } else {
      for (const auto& e : n.array("backgrounds")) spec.background_ids.push_back(background_id_of(e, "backgrounds"));
    }
    for (int id : spec.background_ids) make_background(id);
  }
  if (n.has("colors")) {
    spec.colors.clear();
    for (const auto& c : n.array("colors")) spec.colors.push_back(color_option_of(c, "colors"));
  }
  if (n.has("weathers")) {
    spec.weathers.clear();
    for (const auto& w : n.array("weathers")) {
      if (!w.is_string()) throw ConfigError("weathers: expected strings");
      spec.weathers.push_back(parse_weather(w.get<std::string>()));
    }
  }
  if (n.has("times")) spec.times = numbers_of(n.raw("times"), "times");
  spec.count_spacing = n.number("count_spacing", spec.count_spacing);
  if (n.has("scenes")) {
    const json& scenes = n.array("scenes");
    for (std::size_t i = 0; i < scenes.size(); ++i) {
      const std::string sp = "scenes[" + std::to_string(i) + "]";
      Node s(scenes[i], sp);
      s.allow_only({"model", "ix", "iy", "yaw", "count", "background", "color", "weather", "time"});
      SweepSpec::Explicit e;
      if (s.has("model")) e.model = s.string("model");
      e.ix = s.integer("ix");
      e.iy = s.integer("iy");
      e.yaw = s.number("yaw", 0.0) * kDeg;
      if (s.has("count")) e.count = s.integer("count");
      if (s.has("background")) e.background_id = background_id_of(s.raw("background"), s.sub("background"));
      if (s.has("color")) e.color = color_option_of(s.raw("color"), s.sub("color"));
      if (s.has("weather")) e.weather = parse_weather(s.string("weather"));
      e.time = s.number("time", 12.0);
      spec.scenes.push_back(std::move(e));
    }
  }
  validate(spec);

  const int first_bg = spec.mode == SweepSpec::Mode::kList ? spec.scenes.front().background_id
                                                           : spec.background_ids.front();
  Scene base = n.has("base") ? scene_of(n.raw("base"), "base", "base")
                             : make_scene(make_background(first_bg));
  return {std::move(spec), std::move(base)};
}

SweepFile load_sweep(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_sweep(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

EgoPath parse_ego_path(std::string_view json_text) {
  const json j = parse_json(json_text);
  Node n(j, "");
  n.allow_only({"waypoints", "speed"});
  EgoPath path;
  path.speed = n.number("speed", path.speed);
  const json& w = n.array("waypoints");
  for (std::size_t i = 0; i < w.size(); ++i)
    path.waypoints.push_back(vec3_of(w[i], "waypoints[" + std::to_string(i) + "]"));
  return path;
}

EgoPath load_ego_path(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_ego_path(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string canonical_json(std::string_view json_text) { return parse_json(json_text).dump(); }

}  // namespace synthlidar
