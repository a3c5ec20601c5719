#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "synthlidar/cli.hpp"
#include "synthlidar/cloud_io.hpp"
#include "synthlidar/scene_io.hpp"

using namespace synthlidar;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string config(const char* name) { return (fs::path(SYNTHLIDAR_SOURCE_DIR) / "configs" / name).string(); }

// Relative path -> bytes for every regular file below `root`.
std::map<std::string, std::vector<std::uint8_t>> tree(const fs::path& root) {
  std::map<std::string, std::vector<std::uint8_t>> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = read_bytes(e.path());
  return out;
}

// A coarse scan pattern keeps the command tests fast.
const std::vector<std::string> kCoarse{"--vres", "1.0", "--hres", "0.5", "--width", "256", "--height", "128"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("scan writes cloud, labels, images and a manifest") {
  const fs::path dir = testing::temp_dir("cli_scan");
  const Run r = run({"scan", "--scene", config("one_car.json"), "--out", (dir / "a").string(), "--format",
                     "kitti_bin", "--format", "csv"});
  REQUIRE(r.code == 0);
  for (const char* f : {"one_car.bin", "one_car.label", "one_car.csv", "one_car.ppm", "one_car_semantic.pgm",
                        "one_car_instance.pgm", "one_car_palette.txt", "manifest.json"})
    CHECK(fs::exists(dir / "a" / f));
  const Manifest m = read_manifest(dir / "a" / "manifest.json");
  REQUIRE(m.records.size() == 1);
  const auto& rec = m.records[0];
  CHECK(rec.scene_id == "one_car");
  CHECK(fs::file_size(dir / "a" / "one_car.bin") == 16 * rec.point_count);
  CHECK(fs::file_size(dir / "a" / "one_car.label") == 4 * rec.point_count);
  const std::string ppm = read_text_file(dir / "a" / "one_car.ppm");
  CHECK(ppm.rfind("P6\n1024 512\n255\n", 0) == 0);
  CHECK(ppm.size() == std::string("P6\n1024 512\n255\n").size() + 3u * 1024 * 512);

  // Repeating the command reproduces every byte.
  REQUIRE(run({"scan", "--scene", config("one_car.json"), "--out", (dir / "b").string(), "--format", "kitti_bin",
               "--format", "csv", "--workers", "3"})
              .code == 0);
  CHECK(tree(dir / "a") == tree(dir / "b"));
}

TEST_CASE("config hash follows generation settings") {
  const fs::path dir = testing::temp_dir("cli_hash");
  auto hash = [&](std::vector<std::string> extra) {
    const fs::path out = dir / std::to_string(extra.size()) / (extra.empty() ? "x" : extra.back());
    REQUIRE(run(with({"scan", "--scene", config("one_car.json"), "--out", out.string(), "--no-images"}, extra)).code == 0);
    return read_manifest(out / "manifest.json").config_hash;
  };
  const std::string base = hash({});
  CHECK(hash({"--workers", "2"}) == base);
  CHECK(hash({"--pitch", "1"}) != base);
  CHECK(hash({"--seed", "5"}) != base);
  CHECK(hash({"--format", "ply"}) != base);
}

TEST_CASE("a missing scene file exits 2 and names the path") {
  const Run r = run({"scan", "--scene", "/no/such/scene.json", "--out", testing::temp_dir("cli_missing").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("/no/such/scene.json") != std::string::npos);
}

TEST_CASE("usage and configuration errors exit 1") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"scan"}).code == 1);
  CHECK(run({"scan", "--scene", config("one_car.json"), "--vres", "0"}).code == 1);
  CHECK(run({"scan", "--scene", config("one_car.json"), "--format", "las"}).code == 1);
  CHECK(run({"--help"}).code == 0);
  const fs::path dir = testing::temp_dir("cli_bad_scene");
  std::ofstream(dir / "bad.json") << R"({"background": 0, "objects": [{"asset": "sedan", "x": 0, "y": 10, "wheels": 4}]})";
  const Run r = run({"scan", "--scene", (dir / "bad.json").string(), "--out", dir.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("objects[0].wheels") != std::string::npos);
}

TEST_CASE("config files are overridden by explicit flags") {
  const fs::path dir = testing::temp_dir("cli_precedence");
  std::ofstream(dir / "lidar.json") << R"({"vertical_fov": 20, "vertical_res": 2, "horizontal_res": 1, "pitch": 3})";
  REQUIRE(run({"scan", "--scene", config("one_car.json"), "--out", (dir / "o").string(), "--no-images",
               "--lidar-config", (dir / "lidar.json").string(), "--pitch", "5"})
              .code == 0);
  const Manifest m = read_manifest(dir / "o" / "manifest.json");
  CHECK(m.lidar.vertical_fov == 20);
  CHECK(m.lidar.vertical_res == 2);
  CHECK(m.lidar.pitch == 5);
  std::ofstream(dir / "typo.json") << R"({"vertical_fvo": 20})";
  CHECK(run({"scan", "--scene", config("one_car.json"), "--out", (dir / "p").string(), "--lidar-config",
             (dir / "typo.json").string()})
            .code == 1);
}

TEST_CASE("the output root defaults to the environment variable") {
  const fs::path dir = testing::temp_dir("cli_env");
  ::setenv("SYNTHLIDAR_OUT", dir.c_str(), 1);
  const Run r = run(with({"scan", "--scene", config("one_car.json"), "--no-images"}, kCoarse));
  ::unsetenv("SYNTHLIDAR_OUT");
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "manifest.json"));
}

TEST_CASE("sweeps resume and do not depend on the worker count") {
  const fs::path dir = testing::temp_dir("cli_sweep");
  const auto args = [&](const std::string& out, const std::string& workers) {
    return with({"sweep", "--sweep", config("small_sweep.json"), "--out", (dir / out).string(), "--workers", workers},
                kCoarse);
  };
  const Run first = run(args("w1", "1"));
  REQUIRE(first.code == 0);
  CHECK(first.out.find("swept 12 scenes (0 reused)") != std::string::npos);
  const auto reference = tree(dir / "w1");
  const Manifest m = read_manifest(dir / "w1" / "manifest.json");
  REQUIRE(m.records.size() == 12);
  CHECK(m.xs == std::vector<double>{-2, 2});
  for (std::size_t k = 0; k < 12; ++k) {
    CHECK(m.records[k].index == k);
    CHECK(m.records[k].cell.has_value());
  }

  REQUIRE(run(args("w4", "4")).code == 0);
  CHECK(tree(dir / "w4") == reference);

  // Interrupt: lose two finished scans and one sidecar.
  fs::remove(dir / "w1" / "scans" / "sweep_000003.bin");
  fs::remove(dir / "w1" / "scans" / "sweep_000007.ppm");
  fs::remove(dir / "w1" / "meta" / "sweep_000010.json");
  const Run again = run(args("w1", "2"));
  REQUIRE(again.code == 0);
  CHECK(again.out.find("swept 12 scenes (9 reused)") != std::string::npos);
  CHECK(tree(dir / "w1") == reference);

  // Changed settings invalidate every sidecar.
  const Run changed = run(with(args("w1", "1"), {"--pitch", "2"}));
  CHECK(changed.out.find("(0 reused)") != std::string::npos);
}

TEST_CASE("ground-truth predictions give an all-ones mIoU map") {
  const fs::path dir = testing::temp_dir("cli_truth");
  REQUIRE(run(with({"sweep", "--sweep", config("small_sweep.json"), "--out", (dir / "d").string(), "--no-images"},
                   kCoarse))
              .code == 0);
  const fs::path manifest = dir / "d" / "manifest.json";
  const Manifest m = read_manifest(manifest);
  fs::create_directories(dir / "pred");
  for (const auto& r : m.records)
    write_prediction_file(dir / "pred" / (r.scene_id + ".pred"), truth_labels(load_record_cloud(m, r, dir / "d")));
  REQUIRE(run({"eval", "--manifest", manifest.string(), "--predictions", (dir / "pred").string()}).code == 0);
  const Run mi = run({"miou", "--metrics", (dir / "d" / "metrics.csv").string(), "--manifest", manifest.string(),
                      "--out", (dir / "map.csv").string()});
  REQUIRE(mi.code == 0);
  const MIoUMap map = parse_miou_json(read_text_file(dir / "map.json"));
  CHECK(map.nx == 2);
  CHECK(map.ny == 3);
  CHECK(map.n == 2);
  for (double v : map.values) CHECK(v == 1.0);
  CHECK(read_text_file(dir / "map.csv") == "y\\x,-2,2\n6,1,1\n12,1,1\n18,1,1\n");

  const Run sel = run({"select", "--map", (dir / "map.json").string(), "--threshold", "0.65", "--out",
                       (dir / "cells.csv").string()});
  CHECK(sel.code == 0);
  CHECK(read_text_file(dir / "cells.csv") == "i,j\n");

  // A truncated prediction file is a data error naming the cloud.
  write_prediction_file(dir / "pred" / "sweep_000004.pred", Prediction{1, 0});
  const Run bad = run({"eval", "--manifest", manifest.string(), "--predictions", (dir / "pred").string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("sweep_000004") != std::string::npos);
}

TEST_CASE("baseline evaluation, selection, export, fit and improvement chain") {
  const fs::path dir = testing::temp_dir("cli_chain");
  REQUIRE(run({"sweep", "--sweep", config("small_sweep.json"), "--out", (dir / "d").string(), "--no-images"}).code == 0);
  const std::string manifest = (dir / "d" / "manifest.json").string();
  REQUIRE(run({"eval", "--manifest", manifest, "--baseline", "--out", (dir / "m1.csv").string(), "--workers", "1",
               "--write-predictions", (dir / "p1").string()})
              .code == 0);
  REQUIRE(run({"eval", "--manifest", manifest, "--baseline", "--out", (dir / "m4.csv").string(), "--workers", "4"})
              .code == 0);
  CHECK(read_text_file(dir / "m1.csv") == read_text_file(dir / "m4.csv"));
  CHECK(fs::file_size(dir / "p1" / "sweep_000000.pred") == read_manifest(dir / "d" / "manifest.json").records[0].point_count);
  CHECK(read_text_file(dir / "m1.csv").rfind("scene_id,i,j,background,class_id,iou,precision,recall,tp,fp,fn\n", 0) == 0);

  REQUIRE(run({"miou", "--metrics", (dir / "m1.csv").string(), "--manifest", manifest, "--backgrounds", "0",
               "--out", (dir / "before.csv").string()})
              .code == 0);
  REQUIRE(run({"select", "--map", (dir / "before.json").string(), "--threshold", "1.0", "--out",
               (dir / "cells.csv").string()})
              .code == 0);
  const auto cells = parse_cells_csv(read_text_file(dir / "cells.csv"));
  REQUIRE_FALSE(cells.empty());
  const Run ex = run({"retrain-export", "--manifest", manifest, "--cells", (dir / "cells.csv").string(), "--validation",
                      "0", "--retrain", "7", "--out", (dir / "re").string()});
  REQUIRE(ex.code == 0);
  const Manifest re = read_manifest(dir / "re" / "manifest.json");
  CHECK(re.records.size() == cells.size());
  for (const auto& r : re.records) {
    CHECK(r.background_id == 7);
    CHECK(fs::exists(dir / "re" / r.files.at("cloud")));
  }
  CHECK(fs::exists(dir / "re" / "split.json"));
  CHECK(run({"retrain-export", "--manifest", manifest, "--cells", (dir / "cells.csv").string(), "--validation", "0,7",
             "--retrain", "7", "--out", (dir / "bad").string()})
            .code == 1);

  REQUIRE(run({"fit", "--manifest", (dir / "re" / "manifest.json").string(), "--out", (dir / "params.json").string()})
              .code == 0);
  REQUIRE(run({"eval", "--manifest", manifest, "--baseline", "--params", (dir / "params.json").string(), "--out",
               (dir / "m2.csv").string()})
              .code == 0);
  REQUIRE(run({"miou", "--metrics", (dir / "m2.csv").string(), "--manifest", manifest, "--backgrounds", "0",
               "--out", (dir / "after.csv").string()})
              .code == 0);
  const Run imp = run({"improve", "--before", (dir / "before.json").string(), "--after", (dir / "after.json").string(),
                       "--out", (dir / "improve.csv").string()});
  REQUIRE(imp.code == 0);
  std::istringstream lines(read_text_file(dir / "improve.csv"));
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) ++count;
  CHECK(count == 1 + 6);
}

TEST_CASE("calib-check") {
  const Run ok = run({"calib-check", "--samples", "2000"});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("FAIL") == std::string::npos);
  CHECK(ok.out.find("PASS") != std::string::npos);
  const Run skew = run({"calib-check", "--axes", "1", "0", "0", "0", "1", "0", "0", "0.1", "1"});
  CHECK(skew.code == 1);
  // A tiny image cannot hold the overlay tolerance.
  const Run coarse = run({"calib-check", "--samples", "100", "--width", "16", "--height", "8"});
  CHECK(coarse.code == 3);
  CHECK(coarse.out.find("FAIL") != std::string::npos);
}

TEST_CASE("drive scans along an ego path") {
  const fs::path dir = testing::temp_dir("cli_drive");
  const Run r = run(with({"drive", "--scene", config("one_car.json"), "--path", config("ego_path.json"), "--out",
                          dir.string(), "--no-images", "--frequency", "1"},
                         kCoarse));
  REQUIRE(r.code == 0);
  const Manifest m = read_manifest(dir / "manifest.json");
  CHECK(m.records.size() == 7);  // 60 m at 10 m per scan
  CHECK(m.records[5].sensor_pose.forward.y == doctest::Approx(1.0));
}

TEST_CASE("render writes images only") {
  const fs::path dir = testing::temp_dir("cli_render");
  REQUIRE(run({"render", "--scene", config("one_car.json"), "--out", dir.string(), "--width", "64", "--height", "32"}).code == 0);
  CHECK(fs::exists(dir / "one_car.ppm"));
  CHECK_FALSE(fs::exists(dir / "one_car.bin"));
}
