#include "synthlidar/sweep.hpp"

#include <cstdio>

#include "synthlidar/assets.hpp"
#include "synthlidar/error.hpp"

namespace synthlidar {

namespace {

template <typename T>
void require_nonempty(const std::vector<T>& v, const char* name) {
  if (v.empty()) throw ConfigError(std::string("sweep list '") + name + "' is empty");
}

std::string point_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sweep_%06zu", index);
  return buf;
}

}  // namespace

void validate(const SweepSpec& spec) {
  require_nonempty(spec.xs, "xs");
  require_nonempty(spec.ys, "ys");
  if (spec.mode == SweepSpec::Mode::kList) {
    if (spec.scenes.empty()) throw ConfigError("sweep list 'scenes' is empty");
    for (const auto& s : spec.scenes) {
      find_asset(s.model);
      if (s.ix < 0 || static_cast<std::size_t>(s.ix) >= spec.xs.size() || s.iy < 0 ||
          static_cast<std::size_t>(s.iy) >= spec.ys.size())
        throw ConfigError("explicit sweep scene refers to a cell outside xs/ys");
      if (s.count < 1) throw ConfigError("car count must be at least 1");
      if (!(s.time >= 0.0 && s.time < 24.0)) throw ConfigError("time must lie in [0, 24)");
    }
    return;
  }
  require_nonempty(spec.car_models, "car_models");
  require_nonempty(spec.yaws, "yaws");
  require_nonempty(spec.counts, "counts");
  require_nonempty(spec.background_ids, "backgrounds");
  require_nonempty(spec.colors, "colors");
  require_nonempty(spec.weathers, "weathers");
  require_nonempty(spec.times, "times");
  for (const auto& m : spec.car_models) find_asset(m);
  for (int c : spec.counts)
    if (c < 1) throw ConfigError("car count must be at least 1");
  for (double t : spec.times)
    if (!(t >= 0.0 && t < 24.0)) throw ConfigError("time must lie in [0, 24)");
  if (!(spec.count_spacing > 0.0)) throw ConfigError("count_spacing must be positive");
}

std::vector<SweepPoint> sweep_points(const SweepSpec& spec) {
  validate(spec);
  std::vector<SweepPoint> out;
  if (spec.mode == SweepSpec::Mode::kList) {
    for (const auto& s : spec.scenes) {
      SweepPoint p;
      p.index = out.size();
      p.id = point_id(p.index);
      p.model = s.model;
      p.cell = {s.ix, s.iy};
      p.x = spec.xs[static_cast<std::size_t>(s.ix)];
      p.y = spec.ys[static_cast<std::size_t>(s.iy)];
      p.yaw = s.yaw;
      p.count = s.count;
      p.background_id = s.background_id;
      p.color = s.color;
      p.weather = s.weather;
      p.time = s.time;
      out.push_back(std::move(p));
    }
    return out;
  }
  out.reserve(spec.background_ids.size() * spec.car_models.size() * spec.counts.size() *
              spec.yaws.size() * spec.colors.size() * spec.weathers.size() * spec.times.size() *
              spec.ys.size() * spec.xs.size());
  for (int bg : spec.background_ids)
    for (const auto& model : spec.car_models)
      for (int count : spec.counts)
        for (double yaw : spec.yaws)
          for (const auto& color : spec.colors)
            for (Weather weather : spec.weathers)
              for (double time : spec.times)
                for (std::size_t iy = 0; iy < spec.ys.size(); ++iy)
                  for (std::size_t ix = 0; ix < spec.xs.size(); ++ix) {
                    SweepPoint p;
                    p.index = out.size();
                    p.id = point_id(p.index);
                    p.model = model;
                    p.cell = {static_cast<int>(ix), static_cast<int>(iy)};
                    p.x = spec.xs[ix];
                    p.y = spec.ys[iy];
                    p.yaw = yaw;
                    p.count = count;
                    p.background_id = bg;
                    p.color = color;
                    p.weather = weather;
                    p.time = time;
                    out.push_back(std::move(p));
                  }
  return out;
}

Scene instantiate_point(const SweepSpec& spec, const SweepPoint& point, const Scene& base_scene) {
  Scene scene = point.background_id == base_scene.background_id()
                    ? base_scene
                    : make_scene(make_background(point.background_id), base_scene.sensor_pose());
  for (int k = 0; k < point.count; ++k) {
    const double y = point.y + spec.count_spacing * k;
    scene = point.color ? place_car(scene, point.model, point.x, y, point.yaw, *point.color)
                        : place_car(scene, point.model, point.x, y, point.yaw);
  }
  return scene.with_environment(point.weather, point.time).with_id(point.id);
}

std::vector<SweepScene> instantiate_sweep(const SweepSpec& spec, const Scene& base_scene) {
  std::vector<SweepScene> out;
  const auto points = sweep_points(spec);
  out.reserve(points.size());
  for (const auto& p : points) out.push_back({instantiate_point(spec, p, base_scene), p});
  return out;
}

}  // namespace synthlidar
