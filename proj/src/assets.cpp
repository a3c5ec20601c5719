#include "synthlidar/assets.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "synthlidar/error.hpp"
#include "synthlidar/rng.hpp"

namespace synthlidar {

void append_box(std::vector<Triangle>& out, const Vec3& lo, const Vec3& hi,
                std::int32_t object_index) {
  const Vec3 c[8] = {
      {lo.x, lo.y, lo.z}, {hi.x, lo.y, lo.z}, {hi.x, hi.y, lo.z}, {lo.x, hi.y, lo.z},
      {lo.x, lo.y, hi.z}, {hi.x, lo.y, hi.z}, {hi.x, hi.y, hi.z}, {lo.x, hi.y, hi.z},
  };
  static constexpr int kFaces[6][4] = {
      {0, 1, 2, 3}, {4, 5, 6, 7}, {0, 1, 5, 4}, {3, 2, 6, 7}, {0, 3, 7, 4}, {1, 2, 6, 5},
  };
  for (const auto& f : kFaces) {
    out.push_back({c[f[0]], c[f[1]], c[f[2]], object_index});
    out.push_back({c[f[0]], c[f[2]], c[f[3]], object_index});
  }
}

namespace {

struct CarShape {
  const char* name;
  double length, width, height;
  double cabin_front, cabin_rear;  // cabin inset from the front/rear bumper
  Rgb color;
};

// Wheels, lower body and cabin. The lower body spans the full length and
// width and the cabin reaches the full height, so the mesh bounds equal the
// footprint.
Asset make_car(const CarShape& s) {
  Asset a;
  a.name = s.name;
  a.class_id = classes::kCar;
  a.base_color = s.color;
  a.footprint = {s.length, s.width, s.height};
  const double hl = s.length / 2;
  const double hw = s.width / 2;
  const double clearance = 0.3;
  const double belt = clearance + (s.height - clearance) * 0.55;
  const double wheel = 0.68;
  const double axle = hl - 0.85;
  for (double xs : {-axle, axle}) {
    for (double ys : {-1.0, 1.0}) {
      const double y_in = ys * (hw - 0.25);
      append_box(a.triangles, {xs - wheel / 2, std::min(y_in, ys * hw), 0.0},
                 {xs + wheel / 2, std::max(y_in, ys * hw), wheel}, 0);
    }
  }
  append_box(a.triangles, {-hl, -hw, clearance}, {hl, hw, belt}, 0);
  append_box(a.triangles, {-hl + s.cabin_rear, -hw + 0.08, belt},
             {hl - s.cabin_front, hw - 0.08, s.height}, 0);
  return a;
}

Asset make_placeholder(const char* name, std::int32_t class_id, Vec3 size, Rgb color) {
  Asset a;
  a.name = name;
  a.class_id = class_id;
  a.base_color = color;
  a.footprint = size;
  append_box(a.triangles, {-size.x / 2, -size.y / 2, 0.0}, {size.x / 2, size.y / 2, size.z}, 0);
  return a;
}

std::vector<Asset> make_assets() {
  std::vector<Asset> out;
  out.push_back(make_car({"compact", 3.8, 1.7, 1.45, 1.3, 0.5, {0.80, 0.15, 0.12}}));
  out.push_back(make_car({"sedan", 4.5, 1.8, 1.5, 1.6, 0.9, {0.15, 0.30, 0.75}}));
  out.push_back(make_car({"suv", 4.8, 1.95, 1.8, 1.3, 0.3, {0.20, 0.55, 0.25}}));
  out.push_back(make_placeholder("pedestrian", classes::kPedestrian, {0.5, 0.6, 1.75},
                                 {0.85, 0.65, 0.20}));
  out.push_back(make_placeholder("cyclist", classes::kCyclist, {1.8, 0.6, 1.7},
                                 {0.60, 0.20, 0.70}));
  return out;
}

class BackgroundBuilder {
 public:
  explicit BackgroundBuilder(Background& bg) : bg_(bg) {}

  void box(const Vec3& lo, const Vec3& hi, const Rgb& color, const char* kind, bool obstacle) {
    const auto piece = static_cast<std::int32_t>(bg_.piece_colors.size());
    append_box(bg_.triangles, lo, hi, piece);
    bg_.piece_colors.push_back(color);
    bg_.piece_names.push_back(kind);
    if (obstacle) bg_.obstacles.push_back({lo, hi});
  }

  void ground(const Aabb& extent, double z, const Rgb& color) {
    const auto piece = static_cast<std::int32_t>(bg_.piece_colors.size());
    const Vec3 a{extent.lo.x, extent.lo.y, z}, b{extent.hi.x, extent.lo.y, z};
    const Vec3 c{extent.hi.x, extent.hi.y, z}, d{extent.lo.x, extent.hi.y, z};
    bg_.triangles.push_back({a, b, c, piece});
    bg_.triangles.push_back({a, c, d, piece});
    bg_.piece_colors.push_back(color);
    bg_.piece_names.push_back("ground");
  }

 private:
  Background& bg_;
};

Rgb jitter(Rng& rng, const Rgb& base, double amount) {
  auto f = [&](double v) { return std::clamp(v + rng.uniform(-amount, amount), 0.0, 1.0); };
  const double r = f(base.r), g = f(base.g), b = f(base.b);
  return {r, g, b};
}

// Street canyon along +X: road of half width `road`, optional curbs, rows of
// buildings, poles and street furniture. Nothing is generated inside the
// corridor |y| < road, so the sensor's forward view of the road stays clear.
Background make_urban(int id) {
  Background bg;
  bg.id = id;
  char name[32];
  std::snprintf(name, sizeof name, "urban-%02d", id);
  bg.name = name;
  bg.seed = background_seed(id);
  bg.ground_z = 0.0;
  bg.extent.lo = {-40.0, -40.0, -1.0};
  bg.extent.hi = {120.0, 40.0, 40.0};

  Rng rng(bg.seed);
  BackgroundBuilder b(bg);
  b.ground(bg.extent, 0.0, jitter(rng, {0.35, 0.35, 0.37}, 0.05));

  const double road = rng.uniform(7.5, 10.0);
  const bool curbs = rng.uniform() < 0.6;
  const double sidewalk = 3.0;
  for (double side : {-1.0, 1.0}) {
    if (curbs) {
      const double y0 = side * road, y1 = side * (road + sidewalk);
      b.box({bg.extent.lo.x, std::min(y0, y1), 0.0}, {bg.extent.hi.x, std::max(y0, y1), 0.15},
            {0.55, 0.55, 0.52}, "curb", true);
    }
    // Building row.
    double x = bg.extent.lo.x + rng.uniform(0.0, 6.0);
    while (x < bg.extent.hi.x - 4.0) {
      const double len = rng.uniform(8.0, 25.0);
      const double gap = rng.uniform() < 0.3 ? rng.uniform(2.0, 8.0) : 0.0;
      const double setback = road + sidewalk + rng.uniform(0.0, 4.0);
      const double depth = rng.uniform(5.0, 15.0);
      const double height = rng.uniform(4.0, 20.0);
      const double x1 = std::min(x + len, bg.extent.hi.x);
      const double y0 = side * setback, y1 = side * (setback + depth);
      b.box({x, std::min(y0, y1), 0.0}, {x1, std::max(y0, y1), height},
            jitter(rng, {0.62, 0.55, 0.48}, 0.15), "building", true);
      x = x1 + gap;
    }
    // Poles along the curb line.
    const auto poles = rng.integer(4, 12);
    for (std::int64_t p = 0; p < poles; ++p) {
      const double px = rng.uniform(-20.0, 100.0);
      const double py = side * (road + 0.5);
      const double h = rng.uniform(4.0, 8.0);
      b.box({px - 0.12, py - 0.12, 0.0}, {px + 0.12, py + 0.12, h}, {0.3, 0.3, 0.32}, "pole",
            true);
    }
    // Street furniture on the sidewalk: bins, kiosks, hedges.
    const auto clutter = rng.integer(0, 4);
    for (std::int64_t c = 0; c < clutter; ++c) {
      const double cx = rng.uniform(-10.0, 90.0);
      const double sx = rng.uniform(0.5, 3.0);
      const double sy = rng.uniform(0.5, 1.8);
      const double sz = rng.uniform(0.6, 2.0);
      const double cy = side * (road + 1.0 + sy / 2 + rng.uniform(0.0, 1.0));
      b.box({cx - sx / 2, cy - sy / 2, 0.0}, {cx + sx / 2, cy + sy / 2, sz},
            jitter(rng, {0.25, 0.45, 0.2}, 0.15), "furniture", true);
    }
  }
  // Far field ahead of the street.
  const auto far = rng.integer(0, 4);
  for (std::int64_t f = 0; f < far; ++f) {
    const double fx = rng.uniform(70.0, 110.0);
    const double fy = rng.uniform(-20.0, 20.0);
    const double s = rng.uniform(2.0, 6.0);
    const double h = rng.uniform(2.0, 10.0);
    b.box({fx - s / 2, fy - s / 2, 0.0}, {fx + s / 2, fy + s / 2, h},
          jitter(rng, {0.5, 0.5, 0.5}, 0.2), "structure", true);
  }
  return bg;
}

Background make_flat() {
  Background bg;
  bg.id = kFlatPresetId;
  bg.name = "flat";
  bg.seed = 0;
  bg.extent.lo = {-40.0, -40.0, -1.0};
  bg.extent.hi = {120.0, 40.0, 40.0};
  BackgroundBuilder b(bg);
  b.ground(bg.extent, 0.0, {0.35, 0.35, 0.37});
  return bg;
}

}  // namespace

const std::vector<Asset>& builtin_assets() {
  static const std::vector<Asset> assets = make_assets();
  return assets;
}

const Asset& find_asset(std::string_view name) {
  for (const Asset& a : builtin_assets())
    if (a.name == name) return a;
  throw ConfigError("unknown asset '" + std::string(name) + "'");
}

Background make_background(int id) {
  if (id >= 0 && id < kUrbanPresetCount) return make_urban(id);
  if (id == kFlatPresetId) return make_flat();
  throw ConfigError("unknown background preset id " + std::to_string(id));
}

Background make_background(std::string_view name) {
  if (name == "flat") return make_flat();
  if (name.starts_with("urban-")) {
    int id = -1;
    const auto digits = name.substr(6);
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && id >= 0 &&
        id < kUrbanPresetCount)
      return make_urban(id);
  }
  throw ConfigError("unknown background preset '" + std::string(name) + "'");
}

std::vector<Background> builtin_backgrounds() {
  std::vector<Background> out;
  for (int id = 0; id < kUrbanPresetCount; ++id) out.push_back(make_urban(id));
  out.push_back(make_flat());
  return out;
}

Scene make_scene(const Background& background) {
  return make_scene(background,
                    Pose::from_yaw({0.0, 0.0, background.ground_z + kDefaultSensorHeight}, 0.0));
}

Scene make_scene(const Background& background, const Pose& sensor_pose) {
  SceneData d;
  d.id = background.name;
  d.background_id = background.id;
  d.sensor_pose = sensor_pose;
  d.ground_z = background.ground_z;
  d.extent = background.extent;
  d.triangles = background.triangles;
  d.obstacles = background.obstacles;
  for (std::size_t i = 0; i < background.piece_colors.size(); ++i)
    d.entities.push_back({{classes::kBackground, 0}, background.piece_colors[i],
                          background.piece_names[i]});
  return Scene(std::move(d));
}

}  // namespace synthlidar
