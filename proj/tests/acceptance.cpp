// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "support.hpp"
#include "synthlidar/assets.hpp"
#include "synthlidar/camera.hpp"
#include "synthlidar/cli.hpp"
#include "synthlidar/cloud_io.hpp"
#include "synthlidar/error.hpp"
#include "synthlidar/eval.hpp"
#include "synthlidar/render.hpp"
#include "synthlidar/scene_io.hpp"
#include "synthlidar/segment.hpp"
#include "synthlidar/sweep.hpp"

using namespace synthlidar;
namespace fs = std::filesystem;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

fs::path source_path(const char* rel) { return fs::path(SYNTHLIDAR_SOURCE_DIR) / rel; }

CameraConfig default_camera(const Pose& pose) { return CameraSettings{}.at(pose); }

// Same direction formula evaluated independently for an axis-aligned sensor.
Vec3 oracle_direction(double zen, double az) {
  const double dy = -std::tan(az) / std::cos(zen), dz = -std::tan(zen);
  const double n = std::sqrt(1.0 + dy * dy + dz * dz);
  return {1.0 / n, dy / n, dz / n};
}

int run_quiet(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

std::map<std::string, std::vector<std::uint8_t>> tree(const fs::path& root) {
  std::map<std::string, std::vector<std::uint8_t>> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = read_bytes(e.path());
  return out;
}

// --- 1 ---------------------------------------------------------------------

Outcome calibration_exactness() {
  const Timer t;
  const LidarConfig lidar;
  const CameraConfig cam = default_camera(Pose{});
  const CalibReport rep = calibration_check(lidar, cam, 10000, 1);

  // Near-distance invariance with two independent near distances.
  CameraConfig a = cam, b = cam;
  a.near = 0.05;
  b.near = 2.5;
  testing::Rng rng(3);
  double f_var = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double zen = rng.uniform(-13.0, 13.0) * kDeg, az = rng.uniform(-45.0, 45.0) * kDeg;
    const PixelCoord pa = calibrate_pixel(zen, az, a), pb = calibrate_pixel(zen, az, b);
    f_var = std::max(f_var, std::hypot(pa.i - pb.i, pa.j - pb.j));
  }
  const double secs = t.seconds();
  Outcome o;
  o.pass = rep.pixel_ok() && rep.near_ok() && f_var < 1e-12 && rep.boresight_ok() && secs < 1.0;
  o.detail = "max pixel error " + fmt(rep.max_pixel_error) + " px over " + std::to_string(rep.samples) +
             " rays (along-ray " + fmt(rep.max_ray_error) + "), near-distance variation " +
             fmt(std::max(f_var, rep.max_near_variation)) + " px, boresight offset " + fmt(rep.boresight_error) +
             ", " + fmt(secs, 3) + " s";
  return o;
}

// --- 2 ---------------------------------------------------------------------

Outcome geometry_oracle() {
  const Timer t;
  std::size_t rays = 0, hits = 0, mismatches = 0;
  double worst = 0.0;
  for (std::uint64_t scene = 0; scene < 20; ++scene) {
    testing::Rng rng(1000 + scene);
    const auto count = static_cast<std::size_t>(rng.integer(1000, 10000));
    const auto tris = testing::random_triangles(rng, count, 100);
    std::vector<ObjectLabel> labels;
    for (int k = 0; k < 100; ++k) labels.push_back({k % 4, k + 1});
    const AccelIndex idx = build_accel(tris, labels);
    for (int k = 0; k < 1000; ++k, ++rays) {
      const Ray r{testing::random_point(rng, -25, 25), testing::random_unit(rng), rng.uniform(5.0, 80.0)};
      const auto hit = idx.first_hit(r);
      const auto oracle = testing::brute_force_first_hit(tris, r);
      if (hit.has_value() != oracle.has_value()) {
        ++mismatches;
        continue;
      }
      if (!hit) continue;
      ++hits;
      const auto& lab = labels[static_cast<std::size_t>(oracle->object_index)];
      worst = std::max(worst, std::abs(hit->distance - oracle->t));
      if (hit->object_index != oracle->object_index || hit->class_id != lab.class_id ||
          hit->instance_id != lab.instance_id || std::abs(hit->distance - oracle->t) > 1e-9)
        ++mismatches;
    }
  }
  const double secs = t.seconds();
  return {mismatches == 0 && secs < 30.0,
          std::to_string(rays) + " rays over 20 scenes (" + std::to_string(hits) + " hits), " +
              std::to_string(mismatches) + " mismatches, max distance difference " + fmt(worst) + " m, " +
              fmt(secs, 3) + " s"};
}

// --- 3 ---------------------------------------------------------------------

Outcome analytic_scan() {
  LidarConfig cfg;
  cfg.pitch = 8.0;
  cfg.max_range = 200.0;
  const Scene ground = parse_scene(
      R"({"background": {"extent": [-500, 500, -500, 500]}, "sensor": {"x": 0, "y": 0, "z": 1.73}})", "ground");
  const Scene wall = parse_scene(R"({"background": {"extent": [-500, 500, -500, 500], "ground": false,
      "boxes": [{"min": [10, -400, -400], "max": [11, 400, 400]}]}, "sensor": {"x": 0, "y": 0, "z": 0}})",
                                 "wall");
  std::size_t checked = 0, bad = 0;
  double worst = 0.0;

  const PointCloud g = scan(ground, cfg);
  std::map<std::pair<int, int>, double> got;
  for (const auto& p : g.points) got[{p.row, p.col}] = p.range;
  for (const auto& a : generate_ray_grid(cfg)) {
    const Vec3 d = oracle_direction(a.zenith, a.azimuth);
    const bool expect = d.z < 0 && 1.73 / -d.z <= cfg.max_range;
    const auto it = got.find({a.row, a.col});
    if (expect != (it != got.end())) {
      ++bad;
      continue;
    }
    if (!expect) continue;
    ++checked;
    const double e = std::abs(it->second - 1.73 / -d.z);
    worst = std::max(worst, e);
    bad += e >= 1e-6;
  }
  const PointCloud w = scan(wall, cfg);
  bad += w.points.size() != cfg.ray_count();
  for (const auto& p : w.points) {
    const RayAngles a = ray_angles(cfg, p.row, p.col);
    const double e = std::abs(p.range - 10.0 / oracle_direction(a.zenith, a.azimuth).x);
    worst = std::max(worst, e);
    bad += e >= 1e-6;
    ++checked;
  }
  return {bad == 0, std::to_string(checked) + " returns (ground and wall) vs closed form, max error " + fmt(worst) +
                        " m, " + std::to_string(bad) + " violations"};
}

// --- 4 ---------------------------------------------------------------------

Outcome overlay_consistency() {
  const Scene s =
      place_car(make_scene(make_background(kFlatPresetId)), "sedan", 0.0, 10.0, 0.0).with_id("overlay");
  const CameraConfig cam = default_camera(s.sensor_pose());
  const std::int32_t car[] = {classes::kCar};
  const OverlayResult r = overlay_points(render(s, cam), scan(s, LidarConfig{}), car, cam);
  return {r.considered > 0 && r.score >= 0.98, std::to_string(r.matched) + " of " + std::to_string(r.considered) +
                                                   " car points on car pixels, score " + fmt(r.score)};
}

// --- 5 ---------------------------------------------------------------------

Outcome sweep_cardinality() {
  const fs::path dir = testing::temp_dir("acceptance_sweep");
  // A 2 x 2 ray pattern keeps 2,250 scans cheap; only the bookkeeping is under test.
  const int code = run_quiet({"sweep", "--sweep", source_path("configs/blind_spot_sweep.json").string(), "--out",
                              dir.string(), "--no-images", "--vfov", "2", "--vres", "2", "--hfov", "2", "--hres", "2"});
  if (code != 0) return {false, "sweep command exited with " + std::to_string(code)};
  const Manifest m = read_manifest(dir / "manifest.json");
  std::map<int, std::set<std::pair<double, double>>> cells;
  std::map<int, int> per_bg;
  bool files_ok = true;
  for (const auto& r : m.records) {
    ++per_bg[r.background_id];
    if (r.cell) cells[r.background_id].insert({r.x, r.y});
    files_ok = files_ok && fs::exists(dir / r.files.at("cloud")) && fs::exists(dir / r.files.at("labels"));
  }
  std::set<std::pair<double, double>> expected;
  for (int x = -5; x <= 4; ++x)
    for (int y = 5; y <= 19; ++y) expected.insert({x, y});
  bool per_ok = per_bg.size() == 15, cover_ok = true;
  for (const auto& [bg, n] : per_bg) per_ok = per_ok && n == 150;
  for (const auto& [bg, c] : cells) cover_ok = cover_ok && c == expected;
  fs::remove_all(dir);
  return {m.records.size() == 2250 && per_ok && cover_ok && files_ok,
          std::to_string(m.records.size()) + " scans over " + std::to_string(per_bg.size()) +
              " backgrounds, 150 per background: " + (per_ok ? "yes" : "no") +
              ", cells exactly {-5..4}x{5..19}: " + (cover_ok ? "yes" : "no")};
}

// --- 6 ---------------------------------------------------------------------

Outcome metrics() {
  std::vector<std::string> failures;
  auto expect = [&](bool ok, const char* what) {
    if (!ok) failures.push_back(what);
  };

  const Prediction pred{0, 1, 1, 1, 0, 0}, truth{0, 0, 1, 1, 1, 0};
  const ClassMetrics m = class_metrics(pred, truth, 1);
  expect(m.iou == 0.5 && std::abs(m.precision - 2.0 / 3) < 1e-15 && std::abs(m.recall - 2.0 / 3) < 1e-15,
         "hand case");
  const ClassMetrics same = class_metrics(truth, truth, 1);
  expect(same.iou == 1 && same.precision == 1 && same.recall == 1, "identity");
  const ClassMetrics none = class_metrics(Prediction(6, 0), truth, 1);
  expect(none.iou == 0 && none.precision == 0 && none.recall == 0, "empty prediction");

  testing::Rng rng(6);
  std::size_t fuzz_bad = 0;
  for (int k = 0; k < 10000; ++k) {
    const auto n = static_cast<std::size_t>(rng.integer(0, 50));
    Prediction p(n), g(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = static_cast<std::int32_t>(rng.integer(0, 3));
      g[i] = static_cast<std::int32_t>(rng.integer(0, 3));
    }
    const ClassMetrics c = class_metrics(p, g, static_cast<std::int32_t>(rng.integer(0, 3)));
    fuzz_bad += !(c.iou <= std::min(c.precision, c.recall));
  }
  expect(fuzz_bad == 0, "IoU <= min(P, R) fuzz");

  std::vector<CellResult> results;
  std::vector<double> sums(150, 0.0);
  for (int bg = 0; bg < 7; ++bg)
    for (int iy = 0; iy < 15; ++iy)
      for (int ix = 0; ix < 10; ++ix) {
        const double v = rng.uniform();
        results.push_back({{ix, iy}, bg, v});
        sums[static_cast<std::size_t>(iy * 10 + ix)] += v;
      }
  const MIoUMap map = miou_map(results, 10, 15);
  double worst = 0.0;
  for (std::size_t c = 0; c < 150; ++c) worst = std::max(worst, std::abs(map.values[c] - sums[c] / 7.0));
  expect(worst < 1e-12, "mIoU brute-force mean");

  std::vector<GridCell> below;
  for (int iy = 0; iy < 15; ++iy)
    for (int ix = 0; ix < 10; ++ix)
      if (map.at(ix, iy) < 0.65) below.push_back({ix, iy});
  const auto sel = select_blind_spots(map, 0.65);
  expect(sel == below, "tau = 0.65 selection");

  bool monotone = true;
  for (int k = 0; k < 500; ++k) {
    const double a = rng.uniform(), b = rng.uniform();
    const auto lo = select_blind_spots(map, std::min(a, b)), hi = select_blind_spots(map, std::max(a, b));
    const std::set<GridCell> hs(hi.begin(), hi.end());
    for (const GridCell& c : lo) monotone = monotone && hs.count(c);
  }
  expect(monotone, "threshold monotonicity");

  std::string detail = "hand cases, 10000 fuzz cases, 150-cell mean (max error " + fmt(worst) + "), selection of " +
                       std::to_string(sel.size()) + " cells, monotonicity";
  if (!failures.empty()) {
    detail += "; failed:";
    for (const auto& f : failures) detail += " " + f;
  }
  return {failures.empty(), detail};
}

// --- 7 ---------------------------------------------------------------------

// Random street scenes with 1-3 non-overlapping cars at forward offsets in
// [ymin, ymax], on random backgrounds.
std::vector<PointCloud> random_scenes(int n, std::uint64_t seed, double ymin, double ymax) {
  testing::Rng rng(seed);
  const char* models[] = {"compact", "sedan", "suv"};
  std::vector<PointCloud> out;
  for (int k = 0; k < n; ++k) {
    Scene s = make_scene(make_background(static_cast<int>(rng.integer(0, kUrbanPresetCount - 1))));
    const auto cars = rng.integer(1, 3);
    std::vector<std::pair<double, double>> placed;
    for (int c = 0; c < cars; ++c) {
      for (int tries = 0; tries < 20; ++tries) {
        const double x = rng.uniform(-6, 5), y = rng.uniform(ymin, ymax);
        bool clear = true;
        for (const auto& [px, py] : placed) clear = clear && !(std::abs(px - x) < 2.6 && std::abs(py - y) < 5.5);
        if (!clear) continue;
        const double yaw = (rng.uniform() < 0.5 ? 0.0 : std::numbers::pi) + rng.uniform(-0.3, 0.3);
        s = place_car(s, models[rng.integer(0, 2)], x, y, yaw);
        placed.push_back({x, y});
        break;
      }
    }
    out.push_back(scan(s.with_id("random_" + std::to_string(seed) + "_" + std::to_string(k)), LidarConfig{}));
  }
  return out;
}

double car_iou(const PointCloud& c, const BaselineParams& p) {
  return class_metrics(baseline_segment(c, p), truth_labels(c), classes::kCar).iou;
}

double mean_car_iou(const std::vector<PointCloud>& clouds, const BaselineParams& p) {
  double s = 0.0;
  for (const auto& c : clouds) s += car_iou(c, p);
  return s / static_cast<double>(clouds.size());
}

Outcome blind_spot_loop() {
  const Timer t;
  const SweepFile sweep = load_sweep(source_path("configs/blind_spot_sweep.json"));
  const auto points = sweep_points(sweep.spec);
  std::map<int, Scene> bases;
  for (int bg : sweep.spec.background_ids) bases.emplace(bg, make_scene(make_background(bg)));
  std::vector<PointCloud> clouds;
  clouds.reserve(points.size());
  for (const auto& pt : points) clouds.push_back(scan(instantiate_point(sweep.spec, pt, bases.at(pt.background_id)), LidarConfig{}));

  const std::set<int> validation{0, 1, 2, 3, 4, 5, 6};
  const int nx = static_cast<int>(sweep.spec.xs.size()), ny = static_cast<int>(sweep.spec.ys.size());
  auto validation_map = [&](const BaselineParams& p) {
    std::vector<CellResult> results;
    for (std::size_t k = 0; k < points.size(); ++k)
      if (validation.count(points[k].background_id))
        results.push_back({points[k].cell, points[k].background_id, car_iou(clouds[k], p)});
    return miou_map(results, nx, ny);
  };

  // The model under test is the segmenter with its default parameters.
  const BaselineParams before_params;
  const MIoUMap before = validation_map(before_params);
  const double rho = spearman(sweep.spec.ys, row_means(before));
  const auto cells = select_blind_spots(before, 0.65);
  const std::set<GridCell> selected(cells.begin(), cells.end());

  // Refit on the original training set plus the retraining backgrounds at the
  // selected cells.
  std::vector<PointCloud> fitting = random_scenes(300, 11, 5.0, 12.0);
  const std::size_t training = fitting.size();
  for (std::size_t k = 0; k < points.size(); ++k)
    if (!validation.count(points[k].background_id) && selected.count(points[k].cell)) fitting.push_back(clouds[k]);
  const FitResult fit = fit_baseline(default_search_space(), fitting);
  const MIoUMap after = validation_map(fit.params);

  double sel_before = 0.0, sel_after = 0.0;
  for (const GridCell& c : cells) {
    sel_before += before.at(c);
    sel_after += after.at(c);
  }
  if (!cells.empty()) {
    sel_before /= static_cast<double>(cells.size());
    sel_after /= static_cast<double>(cells.size());
  }

  const std::vector<PointCloud> held_out = random_scenes(200, 12, 5.0, 25.0);
  const double held_before = mean_car_iou(held_out, before_params);
  const double held_after = mean_car_iou(held_out, fit.params);
  const double secs = t.seconds();

  const bool a = rho < 0.0;
  const bool b = !cells.empty() && sel_after >= sel_before;
  const bool c = held_before - held_after < 0.02;
  std::string detail = "(a) Spearman(Y, row mIoU) " + fmt(rho) + "; (b) " + std::to_string(cells.size()) +
                       " cells below 0.65, their validation mIoU " + fmt(sel_before) + " -> " + fmt(sel_after) +
                       " after fitting on " + std::to_string(training) + " training + " +
                       std::to_string(fitting.size() - training) + " retraining scans (radius " +
                       fmt(before_params.cluster_radius) + " -> " + fmt(fit.params.cluster_radius) + ", min height " +
                       fmt(before_params.min_size.z) + " -> " + fmt(fit.params.min_size.z) +
                       "); (c) held-out mean IoU " + fmt(held_before) + " -> " + fmt(held_after) + "; " +
                       fmt(secs, 4) + " s";
  return {a && b && c && secs < 600.0, detail};
}

// --- 8 ---------------------------------------------------------------------

Outcome determinism() {
  const fs::path dir = testing::temp_dir("acceptance_determinism");
  const std::string scene = source_path("configs/one_car.json").string();
  const std::string sweep = source_path("configs/small_sweep.json").string();
  const std::string path = source_path("configs/ego_path.json").string();
  std::vector<std::string> failures;
  for (const char* w : {"1", "4"}) {
    const std::string d = (dir / w).string();
    bool ok = run_quiet({"scan", "--scene", scene, "--out", d + "/scan", "--workers", w, "--format", "kitti_bin",
                         "--format", "ply", "--format", "csv"}) == 0;
    ok = ok && run_quiet({"sweep", "--sweep", sweep, "--out", d + "/sweep", "--workers", w}) == 0;
    ok = ok && run_quiet({"drive", "--scene", scene, "--path", path, "--out", d + "/drive", "--workers", w,
                          "--frequency", "2", "--no-images"}) == 0;
    ok = ok && run_quiet({"eval", "--manifest", d + "/sweep/manifest.json", "--baseline", "--out",
                          d + "/metrics.csv", "--workers", w, "--write-predictions", d + "/pred"}) == 0;
    ok = ok && run_quiet({"miou", "--metrics", d + "/metrics.csv", "--manifest", d + "/sweep/manifest.json",
                          "--out", d + "/map.csv"}) == 0;
    ok = ok && run_quiet({"select", "--map", d + "/map.json", "--threshold", "0.9", "--out", d + "/cells.csv"}) == 0;
    ok = ok && run_quiet({"retrain-export", "--manifest", d + "/sweep/manifest.json", "--cells", d + "/cells.csv",
                          "--validation", "0", "--retrain", "7", "--out", d + "/retrain"}) == 0;
    ok = ok && run_quiet({"fit", "--manifest", d + "/sweep/manifest.json", "--out", d + "/params.json", "--workers",
                          w}) == 0;
    if (!ok) failures.push_back(std::string("a command failed with --workers ") + w);
  }
  // Repeat with one worker into a fresh directory.
  const std::string again = (dir / "again").string();
  if (run_quiet({"scan", "--scene", scene, "--out", again, "--format", "kitti_bin", "--format", "ply", "--format",
                 "csv"}) != 0)
    failures.push_back("repeat scan failed");
  const auto one = tree(dir / "1"), four = tree(dir / "4");
  if (one != four) failures.push_back("outputs differ between 1 and 4 workers");
  if (tree(dir / "1" / "scan") != tree(again)) failures.push_back("repeated scan differs");
  const std::size_t files = one.size();
  fs::remove_all(dir);
  std::string detail = "scan, sweep, drive, eval, miou, select, retrain-export and fit: " + std::to_string(files) +
                       " files compared between 1 and 4 workers plus a repeated scan";
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty(), detail};
}

// --- 9 ---------------------------------------------------------------------

Outcome scan_performance() {
  // Cluttered street block: ground slab plus random boxes, 100,008 triangles.
  SceneData d;
  d.id = "performance";
  d.background_id = -1;
  d.sensor_pose = Pose::from_yaw({0, 0, kDefaultSensorHeight}, 0.0);
  d.extent.lo = {-100, -100, -1};
  d.extent.hi = {100, 100, 30};
  d.entities.push_back({{classes::kBackground, 0}, {0.5, 0.5, 0.5}, "clutter"});
  append_box(d.triangles, {-100, -100, -0.5}, {100, 100, 0.0}, 0);
  testing::Rng rng(9);
  while (d.triangles.size() < 100000) {
    const Vec3 c{rng.uniform(-90, 90), rng.uniform(-90, 90), 0.0};
    if (std::abs(c.x) < 3 && std::abs(c.y) < 3) continue;
    const Vec3 size{rng.uniform(0.2, 3.0), rng.uniform(0.2, 3.0), rng.uniform(0.3, 8.0)};
    append_box(d.triangles, {c.x - size.x / 2, c.y - size.y / 2, 0.0}, {c.x + size.x / 2, c.y + size.y / 2, size.z}, 0);
  }
  const Scene s(std::move(d));
  const std::size_t tris = s.triangles().size();
  const LidarConfig cfg;
  s.accel();  // index construction is not part of the budget
  std::vector<double> times;
  std::size_t points = 0;
  for (int k = 0; k < 7; ++k) {
    const Timer t;
    points = scan(s, cfg, {0, 1}).points.size();
    times.push_back(t.seconds() * 1000.0);
  }
  std::sort(times.begin(), times.end());
  const double median = times[times.size() / 2];
  return {tris >= 100000 && median < 100.0,
          std::to_string(cfg.rows()) + "x" + std::to_string(cfg.cols()) + " rays, " + std::to_string(tris) +
              " triangles, " + std::to_string(points) + " returns, single worker: median " + fmt(median, 3) +
              " ms (min " + fmt(times.front(), 3) + ", max " + fmt(times.back(), 3) + ") over 7 scans"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"calibration exactness", calibration_exactness},
      {"geometry oracle", geometry_oracle},
      {"analytic scan", analytic_scan},
      {"overlay consistency", overlay_consistency},
      {"sweep cardinality", sweep_cardinality},
      {"metrics", metrics},
      {"blind-spot loop", blind_spot_loop},
      {"determinism", determinism},
      {"scan performance", scan_performance},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << k + 1 << " " << criteria[k].first << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
