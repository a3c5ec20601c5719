#include "synthlidar/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "synthlidar/ego.hpp"
#include "synthlidar/error.hpp"
#include "synthlidar/parallel.hpp"
#include "synthlidar/render.hpp"
#include "synthlidar/scene_io.hpp"
#include "synthlidar/segment.hpp"
#include "text_format.hpp"

namespace synthlidar {

namespace fs = std::filesystem;

namespace {

fs::path default_output_root() {
  if (const char* env = std::getenv("SYNTHLIDAR_OUT"); env != nullptr && *env != '\0') return env;
  return "synthlidar_out";
}

// "0-6,9" -> {0, ..., 6, 9}
std::vector<int> parse_id_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    try {
      const auto dash = part.find('-', 1);
      if (dash == std::string::npos) {
        out.push_back(std::stoi(part));
      } else {
        const int lo = std::stoi(part.substr(0, dash));
        const int hi = std::stoi(part.substr(dash + 1));
        if (hi < lo) throw ConfigError("empty range '" + part + "'");
        for (int v = lo; v <= hi; ++v) out.push_back(v);
      }
    } catch (const std::logic_error&) {
      throw ConfigError("cannot read id list '" + text + "'");
    }
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_text_atomic(path, text);
}

// Sensor options shared by the generating commands: config files first, then
// explicit flags on top.
struct SensorOptions {
  std::string lidar_file, camera_file;
  LidarConfig lidar_flags;
  CameraSettings camera_flags;
  std::vector<std::pair<CLI::Option*, std::function<void(LidarConfig&, CameraSettings&)>>> overrides;

  void add(CLI::App* app) {
    app->add_option("--lidar-config", lidar_file, "JSON file with LiDAR settings");
    app->add_option("--camera-config", camera_file, "JSON file with camera settings");
    lidar(app, "--vfov", &LidarConfig::vertical_fov, "vertical field of view, degrees");
    lidar(app, "--vres", &LidarConfig::vertical_res, "vertical resolution, degrees");
    lidar(app, "--hfov", &LidarConfig::horizontal_fov, "horizontal field of view, degrees");
    lidar(app, "--hres", &LidarConfig::horizontal_res, "horizontal resolution, degrees");
    lidar(app, "--pitch", &LidarConfig::pitch, "downward tilt, degrees");
    lidar(app, "--max-range", &LidarConfig::max_range, "maximum range, m");
    lidar(app, "--frequency", &LidarConfig::frequency, "scan frequency, Hz");
    lidar(app, "--noise", &LidarConfig::range_noise_stddev, "range noise standard deviation, m");
    auto* w = app->add_option("--width", camera_flags.width, "image width, pixels");
    overrides.emplace_back(w, [this](LidarConfig&, CameraSettings& c) { c.width = camera_flags.width; });
    auto* h = app->add_option("--height", camera_flags.height, "image height, pixels");
    overrides.emplace_back(h, [this](LidarConfig&, CameraSettings& c) { c.height = camera_flags.height; });
    auto* g = app->add_option("--half-vfov", camera_flags.half_vfov_deg, "camera half vertical FOV, degrees");
    overrides.emplace_back(g, [this](LidarConfig&, CameraSettings& c) { c.half_vfov_deg = camera_flags.half_vfov_deg; });
    auto* n = app->add_option("--near", camera_flags.near, "near-plane distance, m");
    overrides.emplace_back(n, [this](LidarConfig&, CameraSettings& c) { c.near = camera_flags.near; });
  }

  void lidar(CLI::App* app, const char* name, double LidarConfig::*field, const char* help) {
    auto* opt = app->add_option(name, lidar_flags.*field, help);
    overrides.emplace_back(opt, [this, field](LidarConfig& l, CameraSettings&) { l.*field = lidar_flags.*field; });
  }

  void resolve(LidarConfig& lidar_out, CameraSettings& camera_out) const {
    LidarConfig l;
    CameraSettings c;
    if (!lidar_file.empty()) l = parse_lidar_config(read_text_file(lidar_file));
    if (!camera_file.empty()) c = parse_camera_settings(read_text_file(camera_file));
    for (const auto& [opt, apply] : overrides)
      if (opt->count() > 0) apply(l, c);
    l.validate();
    c.at(Pose{}).validate();
    lidar_out = l;
    camera_out = c;
  }
};

struct GenerationOptions {
  SensorOptions sensors;
  std::vector<std::string> formats{"kitti_bin"};
  std::uint64_t seed = 0;
  unsigned workers = 1;
  bool no_images = false;
  std::string out;

  void add(CLI::App* app, bool with_images = true) {
    sensors.add(app);
    app->add_option("--format", formats, "cloud formats: kitti_bin, ply, csv (repeatable)");
    app->add_option("--seed", seed, "base seed of the range noise");
    app->add_option("--workers", workers, "worker threads, 0 = all cores");
    if (with_images) app->add_flag("--no-images", no_images, "skip the camera images");
    app->add_option("--out", out, "output directory (default $SYNTHLIDAR_OUT or ./synthlidar_out)");
  }

  GenerationSettings settings() const {
    GenerationSettings s;
    sensors.resolve(s.lidar, s.camera);
    s.formats.clear();
    for (const std::string& f : formats) {
      const CloudFormat cf = parse_cloud_format(f);
      if (std::find(s.formats.begin(), s.formats.end(), cf) == s.formats.end()) s.formats.push_back(cf);
    }
    if (s.formats.empty()) throw ConfigError("at least one --format is required");
    s.images = !no_images;
    s.seed = seed;
    return s;
  }

  fs::path out_dir() const { return out.empty() ? default_output_root() : fs::path(out); }
};

bool all_files_exist(const ManifestRecord& r, const fs::path& root) {
  return std::all_of(r.files.begin(), r.files.end(),
                     [&](const auto& kv) { return fs::exists(root / kv.second); });
}

// --- scan / render / drive / sweep -----------------------------------------

int cmd_scan(const GenerationOptions& opt, const std::string& scene_file, std::ostream& out,
             std::ostream& err) {
  const GenerationSettings settings = opt.settings();
  const Scene scene = load_scene(scene_file);
  for (const std::string& w : scene.warnings()) err << "warning: " << w << '\n';
  const std::string hash =
      fnv1a_hex(settings.canonical() + "|scene=" + scene.id() + "|" + canonical_json(read_text_file(scene_file)));
  const fs::path root = opt.out_dir();
  Manifest manifest;
  manifest.config_hash = hash;
  manifest.lidar = settings.lidar;
  manifest.records.push_back(write_scan(scene, scene.sensor_pose(), scene.id(), settings, 0, hash, root, "",
                                        opt.workers));
  write_text(root / "manifest.json", manifest_json(manifest));
  out << "scanned '" << scene.id() << "': " << manifest.records[0].point_count << " points -> "
      << root.string() << '\n';
  return kExitOk;
}

int cmd_render(const GenerationOptions& opt, const std::string& scene_file, std::ostream& out) {
  const GenerationSettings settings = opt.settings();
  const Scene scene = load_scene(scene_file);
  const fs::path root = opt.out_dir();
  fs::create_directories(root);
  const RenderedImage img = render(scene, settings.camera.at(scene.sensor_pose()), {60.0, opt.workers});
  const ImageFiles files = export_image(img, root / scene.id());
  out << "rendered '" << scene.id() << "' -> " << files.color.string() << '\n';
  return kExitOk;
}

int cmd_drive(const GenerationOptions& opt, const std::string& scene_file, const std::string& path_file,
              std::ostream& out) {
  const GenerationSettings settings = opt.settings();
  const Scene scene = load_scene(scene_file);
  const EgoPath path = load_ego_path(path_file);
  const auto poses = ego_scan_poses(path, settings.lidar.frequency);
  const std::string hash = fnv1a_hex(settings.canonical() + "|scene=" + canonical_json(read_text_file(scene_file)) +
                                     "|path=" + canonical_json(read_text_file(path_file)));
  const fs::path root = opt.out_dir();
  Manifest manifest;
  manifest.config_hash = hash;
  manifest.lidar = settings.lidar;
  for (std::size_t k = 0; k < poses.size(); ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "_frame_%05zu", k);
    manifest.records.push_back(
        write_scan(scene, poses[k], scene.id() + name, settings, k, hash, root, "frames", opt.workers));
  }
  write_text(root / "manifest.json", manifest_json(manifest));
  out << "drove '" << scene.id() << "': " << poses.size() << " scans -> " << root.string() << '\n';
  return kExitOk;
}

int cmd_sweep(const GenerationOptions& opt, const std::string& sweep_file, std::ostream& out) {
  const GenerationSettings settings = opt.settings();
  const std::string text = read_text_file(sweep_file);
  const SweepFile sweep = parse_sweep(text);
  const auto points = sweep_points(sweep.spec);
  const std::string hash = fnv1a_hex(settings.canonical() + "|sweep=" + canonical_json(text));
  const fs::path root = opt.out_dir();
  fs::create_directories(root / "meta");
  fs::create_directories(root / "scans");

  std::vector<ManifestRecord> records(points.size());
  std::atomic<std::size_t> reused{0};
  parallel_for(points.size(), opt.workers, [&](std::size_t k) {
    const SweepPoint& pt = points[k];
    const fs::path meta = root / "meta" / (pt.id + ".json");
    if (fs::exists(meta)) {
      try {
        ManifestRecord r = parse_record_json(read_text_file(meta));
        if (r.config_hash == hash && r.index == pt.index && all_files_exist(r, root)) {
          records[k] = std::move(r);
          ++reused;
          return;
        }
      } catch (const DataError&) {
        // unreadable sidecar: regenerate
      }
    }
    const Scene scene = instantiate_point(sweep.spec, pt, sweep.base);
    ManifestRecord r = write_scan(scene, scene.sensor_pose(), pt.id, settings, pt.index, hash, root, "scans", 1);
    r.cell = pt.cell;
    r.x = pt.x;
    r.y = pt.y;
    r.model = pt.model;
    r.yaw_deg = pt.yaw * 180.0 / std::numbers::pi;
    r.count = pt.count;
    r.color = pt.color;
    write_text_atomic(meta, record_json(r));
    records[k] = std::move(r);
  });

  Manifest manifest;
  manifest.config_hash = hash;
  manifest.lidar = settings.lidar;
  manifest.xs = sweep.spec.xs;
  manifest.ys = sweep.spec.ys;
  manifest.records = std::move(records);
  write_text(root / "manifest.json", manifest_json(manifest));
  out << "swept " << points.size() << " scenes (" << reused.load() << " reused) -> " << root.string() << '\n';
  return kExitOk;
}

// --- calibration ------------------------------------------------------------

int cmd_calib_check(const SensorOptions& sensors, std::size_t samples, std::uint64_t seed,
                    const std::vector<double>& axes, std::ostream& out) {
  LidarConfig lidar;
  CameraSettings cs;
  sensors.resolve(lidar, cs);
  CameraConfig cam = cs.at(Pose{});
  if (!axes.empty()) {
    if (axes.size() != 9) throw ConfigError("--axes takes 9 numbers: forward, right, up");
    cam.forward = {axes[0], axes[1], axes[2]};
    cam.right = {axes[3], axes[4], axes[5]};
    cam.up = {axes[6], axes[7], axes[8]};
  }
  const CalibReport rep = calibration_check(lidar, cam, samples, seed);
  auto line = [&](bool ok, const std::string& what) { out << (ok ? "PASS " : "FAIL ") << what << '\n'; };
  line(rep.pixel_ok(), "max pixel error " + format_double(rep.max_pixel_error) + " px (near point), " +
                           format_double(rep.max_ray_error) + " px (along ray) over " +
                           std::to_string(rep.samples) + " rays; limit 1e-9");
  line(rep.near_ok(), "near-distance invariance " + format_double(rep.max_near_variation) + " px; limit 1e-12");
  line(rep.boresight_ok(), "boresight offset " + format_double(rep.boresight_error) + " px");
  line(rep.overlay_ok(), "overlay score " + format_double(rep.overlay_score) + " over " +
                             std::to_string(rep.overlay_points) + " car points; minimum 0.98");
  if (!rep.ok()) throw ToleranceError("calibration check failed");
  return kExitOk;
}

// --- evaluation -------------------------------------------------------------

struct MetricsRow {
  std::string scene_id;
  std::optional<GridCell> cell;
  int background = 0;
  ClassMetrics m;
};

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string s = "scene_id,i,j,background,class_id,iou,precision,recall,tp,fp,fn\n";
  for (const MetricsRow& r : rows) {
    s += r.scene_id + ',' + (r.cell ? std::to_string(r.cell->ix) : "") + ',' +
         (r.cell ? std::to_string(r.cell->iy) : "") + ',' + std::to_string(r.background) + ',' +
         std::to_string(r.m.class_id) + ',' + format_double(r.m.iou) + ',' + format_double(r.m.precision) +
         ',' + format_double(r.m.recall) + ',' + std::to_string(r.m.tp) + ',' + std::to_string(r.m.fp) +
         ',' + std::to_string(r.m.fn) + '\n';
  }
  return s;
}

std::vector<MetricsRow> parse_metrics_csv(const std::string& text, const std::string& path) {
  std::vector<MetricsRow> rows;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 || line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 11) throw DataError(path + " line " + std::to_string(lineno) + ": expected 11 fields");
    try {
      MetricsRow r;
      r.scene_id = f[0];
      if (!f[1].empty()) r.cell = GridCell{std::stoi(f[1]), std::stoi(f[2])};
      r.background = std::stoi(f[3]);
      r.m.class_id = std::stoi(f[4]);
      r.m.iou = std::stod(f[5]);
      r.m.precision = std::stod(f[6]);
      r.m.recall = std::stod(f[7]);
      r.m.tp = std::stoull(f[8]);
      r.m.fp = std::stoull(f[9]);
      r.m.fn = std::stoull(f[10]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw DataError(path + " line " + std::to_string(lineno) + ": malformed number");
    }
  }
  return rows;
}

int cmd_eval(const std::string& manifest_path, const std::string& pred_dir, bool baseline,
             const std::string& params_file, int class_id, const std::string& out_path,
             const std::string& write_pred_dir, unsigned workers, std::ostream& out) {
  if (baseline == !pred_dir.empty()) throw ConfigError("eval needs exactly one of --predictions or --baseline");
  BaselineParams params;
  if (!params_file.empty()) params = parse_baseline_params(read_text_file(params_file));
  const Manifest manifest = read_manifest(manifest_path);
  const fs::path root = fs::path(manifest_path).parent_path();
  if (!write_pred_dir.empty()) fs::create_directories(write_pred_dir);

  std::vector<MetricsRow> rows(manifest.records.size());
  parallel_for(manifest.records.size(), workers, [&](std::size_t k) {
    const ManifestRecord& r = manifest.records[k];
    const PointCloud cloud = load_record_cloud(manifest, r, root);
    const Prediction pred = baseline ? baseline_segment(cloud, params)
                                     : read_prediction_file(fs::path(pred_dir) / (r.scene_id + ".pred"),
                                                            cloud.points.size(), r.scene_id);
    if (!write_pred_dir.empty()) write_prediction_file(fs::path(write_pred_dir) / (r.scene_id + ".pred"), pred);
    rows[k] = {r.scene_id, r.cell, r.background_id, class_metrics(pred, truth_labels(cloud), class_id)};
  });

  const fs::path dest = out_path.empty() ? root / "metrics.csv" : fs::path(out_path);
  write_text(dest, metrics_csv(rows));
  double mean = 0.0;
  for (const MetricsRow& r : rows) mean += r.m.iou;
  if (!rows.empty()) mean /= static_cast<double>(rows.size());
  out << "evaluated " << rows.size() << " clouds, mean IoU " << format_double(mean) << " -> " << dest.string()
      << '\n';
  return kExitOk;
}

fs::path json_sibling(const fs::path& csv) {
  fs::path p = csv;
  p.replace_extension(".json");
  return p;
}

int cmd_miou(const std::string& metrics_path, const std::string& manifest_path, const std::string& backgrounds,
             const std::string& out_path, std::ostream& out) {
  const Manifest manifest = read_manifest(manifest_path);
  if (manifest.xs.empty() || manifest.ys.empty())
    throw DataError(manifest_path + " has no sweep grid");
  const auto rows = parse_metrics_csv(read_text_file(metrics_path), metrics_path);
  const std::vector<int> keep = backgrounds.empty() ? std::vector<int>{} : parse_id_list(backgrounds);
  std::vector<CellResult> results;
  for (const MetricsRow& r : rows) {
    if (!keep.empty() && std::find(keep.begin(), keep.end(), r.background) == keep.end()) continue;
    if (!r.cell) throw DataError(metrics_path + ": cloud '" + r.scene_id + "' has no grid cell");
    results.push_back({*r.cell, r.background, r.m.iou});
  }
  MIoUMap map = miou_map(results, static_cast<int>(manifest.xs.size()), static_cast<int>(manifest.ys.size()));
  map.xs = manifest.xs;
  map.ys = manifest.ys;
  const fs::path csv = out_path;
  write_text(csv, miou_csv(map));
  write_text(json_sibling(csv), miou_json(map));
  double mean = 0.0;
  for (double v : map.values) mean += v;
  mean /= static_cast<double>(map.values.size());
  out << "mIoU map " << map.nx << "x" << map.ny << " over " << map.n << " backgrounds, mean "
      << format_double(mean) << " -> " << csv.string() << '\n';
  return kExitOk;
}

int cmd_select(const std::string& map_path, double tau, const std::string& out_path, std::ostream& out) {
  const MIoUMap map = parse_miou_json(read_text_file(map_path));
  const auto cells = select_blind_spots(map, tau);
  write_text(out_path, cells_csv(cells));
  out << "selected " << cells.size() << " of " << map.nx * map.ny << " cells with mIoU < " << format_double(tau)
      << " -> " << out_path << '\n';
  return kExitOk;
}

int cmd_retrain_export(const std::string& manifest_path, const std::string& cells_path,
                       const std::string& validation, const std::string& retrain, const std::string& out_dir,
                       std::ostream& out) {
  const Manifest manifest = read_manifest(manifest_path);
  const auto cells = parse_cells_csv(read_text_file(cells_path));
  const auto v = parse_id_list(validation);
  const auto r = parse_id_list(retrain);
  const RetrainSet set = build_retrain_set(cells, manifest, v, r);
  export_retrain_set(set, manifest, fs::path(manifest_path).parent_path(), out_dir);
  out << "exported " << set.records.size() << " scans (" << cells.size() << " cells x " << r.size()
      << " backgrounds) -> " << out_dir << '\n';
  return kExitOk;
}

SearchSpace parse_search_space(const std::string& text) {
  SearchSpace s = default_search_space();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    for (const auto& [key, v] : j.items()) {
      if (key == "ground_heights") s.ground_heights = v.get<std::vector<double>>();
      else if (key == "cluster_radii") s.cluster_radii = v.get<std::vector<double>>();
      else if (key == "min_sizes" || key == "max_sizes") {
        std::vector<Vec3> sizes;
        for (const auto& t : v.get<std::vector<std::vector<double>>>()) {
          if (t.size() != 3) throw ConfigError("search space: sizes are [l, w, h]");
          sizes.push_back({t[0], t[1], t[2]});
        }
        (key == "min_sizes" ? s.min_sizes : s.max_sizes) = sizes;
      } else {
        throw ConfigError("unknown search space key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("search space: ") + e.what());
  }
  return s;
}

int cmd_fit(const std::vector<std::string>& manifests, const std::string& space_file, const std::string& out_path,
            unsigned workers, std::ostream& out) {
  const SearchSpace space = space_file.empty() ? default_search_space() : parse_search_space(read_text_file(space_file));
  std::vector<PointCloud> clouds;
  for (const std::string& m : manifests) {
    const Manifest manifest = read_manifest(m);
    for (const ManifestRecord& r : manifest.records)
      clouds.push_back(load_record_cloud(manifest, r, fs::path(m).parent_path()));
  }
  const FitResult fit = fit_baseline(space, clouds, workers);
  write_text(out_path, baseline_params_json(fit.params));
  out << "fitted on " << clouds.size() << " clouds (" << space.size() << " candidates): mean car IoU "
      << format_double(fit.score) << ", cluster_radius " << format_double(fit.params.cluster_radius) << " -> "
      << out_path << '\n';
  return kExitOk;
}

int cmd_improve(const std::string& before, const std::string& after, const std::string& out_path,
                std::ostream& out) {
  const MIoUMap b = parse_miou_json(read_text_file(before));
  const MIoUMap a = parse_miou_json(read_text_file(after));
  const ImprovementReport rep = improvement_report(b, a);
  write_text(out_path, improvement_csv(rep));
  out << "improved " << rep.improved << ", degraded " << rep.degraded << ", unchanged " << rep.unchanged
      << "; mean mIoU " << format_double(rep.mean_before) << " -> " << format_double(rep.mean_after) << " -> "
      << out_path << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthetic LiDAR scans, calibrated images and blind-spot evaluation", "synthlidar"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "synthlidar 1.0.0");

  GenerationOptions scan_opt, sweep_opt, render_opt, drive_opt;
  std::string scene_file, sweep_file, path_file;

  auto* scan = app.add_subcommand("scan", "scan and render one scene file");
  scan->add_option("--scene", scene_file, "scene JSON file")->required();
  scan_opt.add(scan);

  auto* sweep = app.add_subcommand("sweep", "generate every scene of a sweep file (resumable)");
  sweep->add_option("--sweep", sweep_file, "sweep JSON file")->required();
  sweep_opt.add(sweep);

  auto* rend = app.add_subcommand("render", "render the camera image of one scene file");
  rend->add_option("--scene", scene_file, "scene JSON file")->required();
  render_opt.add(rend, false);

  auto* drive = app.add_subcommand("drive", "scan a scene along an ego path at the LiDAR frequency");
  drive->add_option("--scene", scene_file, "scene JSON file")->required();
  drive->add_option("--path", path_file, "ego path JSON file")->required();
  drive_opt.add(drive);

  SensorOptions calib_sensors;
  std::size_t samples = 10000;
  std::uint64_t calib_seed = 1;
  std::vector<double> axes;
  auto* calib = app.add_subcommand("calib-check", "verify image calibration against projection");
  calib->add_option("--samples", samples, "random rays to test");
  calib->add_option("--seed", calib_seed, "seed of the random rays");
  calib->add_option("--axes", axes, "camera forward, right, up as 9 numbers")->expected(9);
  calib_sensors.add(calib);

  std::string manifest_path, pred_dir, params_file, out_path, write_pred_dir;
  bool baseline = false;
  int class_id = classes::kCar;
  unsigned eval_workers = 1;
  auto* eval = app.add_subcommand("eval", "per-cloud metrics from predictions or the baseline segmenter");
  eval->add_option("--manifest", manifest_path, "dataset manifest.json")->required();
  eval->add_option("--predictions", pred_dir, "directory of <scene_id>.pred files");
  eval->add_flag("--baseline", baseline, "use the built-in baseline segmenter");
  eval->add_option("--params", params_file, "baseline parameter JSON");
  eval->add_option("--class", class_id, "evaluated class id (default car)");
  eval->add_option("--out", out_path, "metrics CSV (default <manifest dir>/metrics.csv)");
  eval->add_option("--write-predictions", write_pred_dir, "also write the predictions used");
  eval->add_option("--workers", eval_workers, "worker threads, 0 = all cores");

  std::string metrics_path, backgrounds, map_out;
  auto* miou = app.add_subcommand("miou", "mIoU map over sweep cells");
  miou->add_option("--metrics", metrics_path, "metrics CSV from eval")->required();
  miou->add_option("--manifest", manifest_path, "sweep manifest.json (grid axes)")->required();
  miou->add_option("--backgrounds", backgrounds, "background ids to average, e.g. 0-6");
  miou->add_option("--out", map_out, "map CSV; a .json twin is written next to it")->required();

  std::string map_path, cells_out;
  double tau = 0.65;
  auto* select = app.add_subcommand("select", "cells whose mIoU is below a threshold");
  select->add_option("--map", map_path, "map JSON from miou")->required();
  select->add_option("--threshold", tau, "threshold tau in [0, 1]");
  select->add_option("--out", cells_out, "cells CSV")->required();

  std::string cells_path, validation = "0-6", retrain = "7-14", export_dir;
  auto* rexport = app.add_subcommand("retrain-export", "copy retraining scans at selected cells");
  rexport->add_option("--manifest", manifest_path, "sweep manifest.json")->required();
  rexport->add_option("--cells", cells_path, "cells CSV from select")->required();
  rexport->add_option("--validation", validation, "validation background ids");
  rexport->add_option("--retrain", retrain, "retraining background ids");
  rexport->add_option("--out", export_dir, "output directory")->required();

  std::vector<std::string> fit_manifests;
  std::string space_file, fit_out;
  unsigned fit_workers = 1;
  auto* fit = app.add_subcommand("fit", "grid-search baseline parameters on labeled scans");
  fit->add_option("--manifest", fit_manifests, "manifest(s) of the fitting scans")->required();
  fit->add_option("--space", space_file, "search space JSON");
  fit->add_option("--out", fit_out, "parameter JSON")->required();
  fit->add_option("--workers", fit_workers, "worker threads, 0 = all cores");

  std::string before_path, after_path, report_out;
  auto* improve = app.add_subcommand("improve", "per-cell mIoU change between two maps");
  improve->add_option("--before", before_path, "map JSON before")->required();
  improve->add_option("--after", after_path, "map JSON after")->required();
  improve->add_option("--out", report_out, "report CSV")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (scan->parsed()) return cmd_scan(scan_opt, scene_file, out, err);
    if (sweep->parsed()) return cmd_sweep(sweep_opt, sweep_file, out);
    if (rend->parsed()) return cmd_render(render_opt, scene_file, out);
    if (drive->parsed()) return cmd_drive(drive_opt, scene_file, path_file, out);
    if (calib->parsed()) return cmd_calib_check(calib_sensors, samples, calib_seed, axes, out);
    if (eval->parsed())
      return cmd_eval(manifest_path, pred_dir, baseline, params_file, class_id, out_path, write_pred_dir,
                      eval_workers, out);
    if (miou->parsed()) return cmd_miou(metrics_path, manifest_path, backgrounds, map_out, out);
    if (select->parsed()) return cmd_select(map_path, tau, cells_out, out);
    if (rexport->parsed()) return cmd_retrain_export(manifest_path, cells_path, validation, retrain, export_dir, out);
    if (fit->parsed()) return cmd_fit(fit_manifests, space_file, fit_out, fit_workers, out);
    if (improve->parsed()) return cmd_improve(before_path, after_path, report_out, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const ToleranceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitTolerance;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitConfig;
}

}  // namespace synthlidar
