#include "synthlidar/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "synthlidar/cloud_io.hpp"
#include "synthlidar/config_io.hpp"
#include "synthlidar/error.hpp"
#include "synthlidar/scene_io.hpp"

namespace synthlidar {

namespace fs = std::filesystem;
using OJson = nlohmann::ordered_json;
using Json = nlohmann::json;

namespace {

OJson vec_json(const Vec3& v) { return OJson::array({v.x, v.y, v.z}); }

Vec3 vec_from(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw DataError("manifest: expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

OJson record_to(const ManifestRecord& r) {
  OJson j;
  j["index"] = r.index;
  j["scene_id"] = r.scene_id;
  if (r.cell) {
    j["cell"] = {{"i", r.cell->ix}, {"j", r.cell->iy}};
    j["x"] = r.x;
    j["y"] = r.y;
  }
  j["model"] = r.model;
  j["yaw"] = r.yaw_deg;
  j["count"] = r.count;
  j["background"] = r.background_id;
  if (r.color) j["color"] = {r.color->r, r.color->g, r.color->b};
  j["weather"] = std::string(to_string(r.weather));
  j["time_of_day"] = r.time_of_day;
  j["seed"] = r.seed;
  j["config_hash"] = r.config_hash;
  j["points"] = r.point_count;
  j["sensor_pose"] = {{"position", vec_json(r.sensor_pose.position)},
                      {"forward", vec_json(r.sensor_pose.forward)},
                      {"right", vec_json(r.sensor_pose.right)},
                      {"up", vec_json(r.sensor_pose.up)}};
  OJson files = OJson::object();
  for (const auto& [kind, path] : r.files) files[kind] = path;
  j["files"] = files;
  return j;
}

ManifestRecord record_from(const Json& j) {
  ManifestRecord r;
  r.index = j.at("index").get<std::size_t>();
  r.scene_id = j.at("scene_id").get<std::string>();
  if (j.contains("cell")) {
    r.cell = GridCell{j["cell"].at("i").get<int>(), j["cell"].at("j").get<int>()};
    r.x = j.at("x").get<double>();
    r.y = j.at("y").get<double>();
  }
  r.model = j.value("model", std::string{});
  r.yaw_deg = j.value("yaw", 0.0);
  r.count = j.value("count", 0);
  r.background_id = j.at("background").get<int>();
  if (j.contains("color")) {
    const auto& c = j["color"];
    r.color = Rgb{c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()};
  }
  r.weather = parse_weather(j.value("weather", std::string("clear")));
  r.time_of_day = j.value("time_of_day", 12.0);
  r.seed = j.at("seed").get<std::uint64_t>();
  r.config_hash = j.at("config_hash").get<std::string>();
  r.point_count = j.at("points").get<std::size_t>();
  const auto& pose = j.at("sensor_pose");
  r.sensor_pose = {vec_from(pose.at("position")), vec_from(pose.at("forward")),
                   vec_from(pose.at("right")), vec_from(pose.at("up"))};
  for (const auto& [kind, path] : j.at("files").items()) r.files[kind] = path.get<std::string>();
  return r;
}

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw DataError(std::string(what) + ": " + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string record_json(const ManifestRecord& record) { return record_to(record).dump(2) + "\n"; }

ManifestRecord parse_record_json(std::string_view text) {
  return guarded("scene record", [&] { return record_from(Json::parse(text)); });
}

std::string manifest_json(const Manifest& m) {
  OJson j;
  j["config_hash"] = m.config_hash;
  j["lidar"] = OJson::parse(lidar_config_json(m.lidar));
  if (!m.xs.empty() || !m.ys.empty()) j["grid"] = {{"xs", m.xs}, {"ys", m.ys}};
  OJson recs = OJson::array();
  for (const ManifestRecord& r : m.records) recs.push_back(record_to(r));
  j["records"] = recs;
  return j.dump(2) + "\n";
}

Manifest parse_manifest_json(std::string_view text) {
  return guarded("manifest", [&] {
    const Json j = Json::parse(text);
    Manifest m;
    m.config_hash = j.at("config_hash").get<std::string>();
    m.lidar = parse_lidar_config(j.at("lidar").dump());
    if (j.contains("grid")) {
      m.xs = j["grid"].at("xs").get<std::vector<double>>();
      m.ys = j["grid"].at("ys").get<std::vector<double>>();
    }
    for (const auto& r : j.at("records")) m.records.push_back(record_from(r));
    return m;
  });
}

void write_text_atomic(const fs::path& path, std::string_view text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + tmp.string() + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw DataError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw DataError("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

Manifest read_manifest(const fs::path& path) {
  try {
    return parse_manifest_json(read_text_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

PointCloud load_record_cloud(const Manifest& manifest, const ManifestRecord& record, const fs::path& root) {
  const auto cloud_it = record.files.find("cloud");
  const auto label_it = record.files.find("labels");
  if (cloud_it == record.files.end() || label_it == record.files.end())
    throw DataError("record '" + record.scene_id + "' has no kitti_bin cloud/labels files");
  PointCloud cloud =
      cloud_from_kitti(read_kitti(root / cloud_it->second, root / label_it->second), manifest.lidar,
                       record.sensor_pose);
  if (cloud.points.size() != record.point_count)
    throw DataError("cloud '" + record.scene_id + "' has " + std::to_string(cloud.points.size()) +
                    " points but the manifest lists " + std::to_string(record.point_count));
  cloud.provenance.scene_id = record.scene_id;
  cloud.provenance.background_id = record.background_id;
  cloud.provenance.cell = record.cell;
  return cloud;
}

void write_prediction_file(const fs::path& path, std::span<const std::int32_t> pred) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(pred.size());
  for (std::int32_t c : pred) {
    if (c < 0 || c > classes::kMaxKnown)
      throw DataError("prediction class id " + std::to_string(c) + " is not a known class");
    bytes.push_back(static_cast<std::uint8_t>(c));
  }
  write_bytes(path, bytes);
}

Prediction read_prediction_file(const fs::path& path, std::size_t expected_points, std::string_view cloud_id) {
  const auto bytes = read_bytes(path);
  if (bytes.size() != expected_points)
    throw DataError("predictions for cloud '" + std::string(cloud_id) + "' have " +
                    std::to_string(bytes.size()) + " entries, expected " + std::to_string(expected_points));
  Prediction out;
  out.reserve(bytes.size());
  for (std::size_t k = 0; k < bytes.size(); ++k) {
    if (bytes[k] > classes::kMaxKnown)
      throw DataError("predictions for cloud '" + std::string(cloud_id) + "': unknown class id " +
                      std::to_string(bytes[k]) + " at point " + std::to_string(k));
    out.push_back(bytes[k]);
  }
  return out;
}

std::vector<Prediction> read_predictions(const fs::path& dir, const Manifest& manifest) {
  std::vector<Prediction> out;
  out.reserve(manifest.records.size());
  for (const ManifestRecord& r : manifest.records)
    out.push_back(read_prediction_file(dir / (r.scene_id + ".pred"), r.point_count, r.scene_id));
  return out;
}

RetrainSet build_retrain_set(std::span<const GridCell> cells, const Manifest& manifest,
                             std::span<const int> validation, std::span<const int> retrain) {
  for (int v : validation)
    if (std::find(retrain.begin(), retrain.end(), v) != retrain.end())
      throw ConfigError("validation and retraining backgrounds overlap at background " + std::to_string(v));

  RetrainSet set;
  set.cells.assign(cells.begin(), cells.end());
  set.validation_backgrounds.assign(validation.begin(), validation.end());
  set.retrain_backgrounds.assign(retrain.begin(), retrain.end());
  for (const GridCell& c : cells)
    for (int bg : retrain) {
      const auto it = std::find_if(manifest.records.begin(), manifest.records.end(), [&](const ManifestRecord& r) {
        return r.cell && *r.cell == c && r.background_id == bg;
      });
      if (it == manifest.records.end())
        throw DataError("no scan for cell (" + std::to_string(c.ix) + ", " + std::to_string(c.iy) +
                        ") on background " + std::to_string(bg));
      set.records.push_back(*it);
    }
  return set;
}

void export_retrain_set(const RetrainSet& set, const Manifest& manifest, const fs::path& source_root,
                        const fs::path& out_dir) {
  fs::create_directories(out_dir);
  Manifest out;
  out.config_hash = manifest.config_hash;
  out.lidar = manifest.lidar;
  out.xs = manifest.xs;
  out.ys = manifest.ys;
  for (const ManifestRecord& r : set.records) {
    for (const auto& [kind, rel] : r.files) {
      const fs::path src = source_root / rel;
      if (!fs::exists(src)) throw DataError("retrain export: missing file '" + src.string() + "'");
      const fs::path dst = out_dir / rel;
      fs::create_directories(dst.parent_path());
      std::error_code ec;
      fs::copy_file(src, dst, fs::copy_options::overwrite_existing, ec);
      if (ec) throw DataError("cannot copy '" + src.string() + "': " + ec.message());
    }
    out.records.push_back(r);
  }
  write_text_atomic(out_dir / "manifest.json", manifest_json(out));

  OJson split;
  split["validation_backgrounds"] = set.validation_backgrounds;
  split["retrain_backgrounds"] = set.retrain_backgrounds;
  OJson cells = OJson::array();
  for (const GridCell& c : set.cells) cells.push_back({c.ix, c.iy});
  split["cells"] = cells;
  split["scans"] = set.records.size();
  write_text_atomic(out_dir / "split.json", split.dump(2) + "\n");
}

}  // namespace synthlidar
