#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "doctest.h"
#include "support.hpp"
#include "synthlidar/assets.hpp"
#include "synthlidar/ego.hpp"
#include "synthlidar/error.hpp"
#include "synthlidar/scene_io.hpp"
#include "synthlidar/sweep.hpp"

using namespace synthlidar;

namespace {

SweepSpec grid_spec() {
  SweepSpec s;
  s.xs.clear();
  s.ys.clear();
  for (int x = -5; x <= 4; ++x) s.xs.push_back(x);
  for (int y = 5; y <= 19; ++y) s.ys.push_back(y);
  return s;
}

}  // namespace

TEST_CASE("one background of the X-Y grid gives 150 points") {
  const auto pts = sweep_points(grid_spec());
  CHECK(pts.size() == 150);
  std::set<std::pair<int, int>> cells;
  for (const auto& p : pts) {
    cells.insert({p.cell.ix, p.cell.iy});
    CHECK(p.x == -5 + p.cell.ix);
    CHECK(p.y == 5 + p.cell.iy);
  }
  CHECK(cells.size() == 150);
}

TEST_CASE("fifteen backgrounds give 2250 points, 150 each") {
  SweepSpec s = grid_spec();
  s.background_ids.clear();
  for (int b = 0; b < 15; ++b) s.background_ids.push_back(b);
  const auto pts = sweep_points(s);
  CHECK(pts.size() == 2250);
  std::map<int, int> per_bg;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    CHECK(pts[k].index == k);
    ++per_bg[pts[k].background_id];
  }
  CHECK(per_bg.size() == 15);
  for (const auto& [bg, n] : per_bg) CHECK(n == 150);
}

TEST_CASE("cartesian size is the product of list sizes") {
  testing::Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    SweepSpec s;
    auto fill = [&](auto& v, auto make) {
      v.clear();
      const auto n = rng.integer(1, 3);
      for (int k = 0; k < n; ++k) v.push_back(make(k));
    };
    fill(s.xs, [](int k) { return -1.0 + k; });
    fill(s.ys, [](int k) { return 6.0 + 2 * k; });
    fill(s.yaws, [](int k) { return 0.5 * k; });
    fill(s.counts, [](int k) { return 1 + k; });
    fill(s.background_ids, [](int k) { return k; });
    fill(s.car_models, [](int k) { return std::string(k == 0 ? "sedan" : k == 1 ? "suv" : "compact"); });
    fill(s.times, [](int k) { return 6.0 * k; });
    const std::size_t expected = s.xs.size() * s.ys.size() * s.yaws.size() * s.counts.size() *
                                 s.background_ids.size() * s.car_models.size() * s.times.size();
    CHECK(sweep_points(s).size() == expected);
  }
}

TEST_CASE("ordering is lexicographic with x fastest") {
  SweepSpec s;
  s.xs = {-1, 1};
  s.ys = {8, 12};
  s.background_ids = {3, 1};
  const auto pts = sweep_points(s);
  REQUIRE(pts.size() == 8);
  CHECK(pts[0].background_id == 3);
  CHECK(pts[0].cell == GridCell{0, 0});
  CHECK(pts[1].cell == GridCell{1, 0});
  CHECK(pts[2].cell == GridCell{0, 1});
  CHECK(pts[4].background_id == 1);
  CHECK(pts[0].id == "sweep_000000");
  CHECK(pts[7].id == "sweep_000007");
}

TEST_CASE("a singleton sweep equals a direct placement") {
  const Scene base = make_scene(make_background(0));
  SweepSpec s;  // sedan at (0, 10), yaw 0, one car, background 0
  const auto out = instantiate_sweep(s, base);
  REQUIRE(out.size() == 1);
  const Scene direct = place_car(base, "sedan", 0.0, 10.0, 0.0);
  const Scene& got = out[0].scene;
  REQUIRE(got.triangles().size() == direct.triangles().size());
  for (std::size_t k = 0; k < got.triangles().size(); ++k) {
    CHECK(got.triangles()[k].v0 == direct.triangles()[k].v0);
    CHECK(got.triangles()[k].v2 == direct.triangles()[k].v2);
  }
  CHECK(got.objects().size() == 1);
  CHECK(got.objects()[0].instance_id == 1);
  CHECK(out[0].point.cell == GridCell{0, 0});
}

TEST_CASE("counts stack cars forward and other backgrounds are generated") {
  const Scene base = make_scene(make_background(0));
  SweepSpec s;
  s.counts = {3};
  s.background_ids = {6};
  s.weathers = {Weather::kFog};
  s.times = {21.0};
  s.colors = {Rgb{0.1, 0.2, 0.3}};
  const auto out = instantiate_sweep(s, base);
  REQUIRE(out.size() == 1);
  const Scene& sc = out[0].scene;
  CHECK(sc.background_id() == 6);
  CHECK(sc.weather() == Weather::kFog);
  CHECK(sc.time_of_day() == 21.0);
  REQUIRE(sc.objects().size() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(sc.objects()[static_cast<std::size_t>(k)].position.x == doctest::Approx(10.0 + 7.0 * k));
    CHECK(sc.objects()[static_cast<std::size_t>(k)].color == Rgb{0.1, 0.2, 0.3});
  }
  CHECK(sc.sensor_pose() == base.sensor_pose());
}

TEST_CASE("explicit scene lists") {
  SweepSpec s;
  s.mode = SweepSpec::Mode::kList;
  s.xs = {-2, 0, 2};
  s.ys = {6, 10};
  s.scenes.push_back({"suv", 2, 1, 0.0, 1, 4, std::nullopt, Weather::kRain, 9.0});
  s.scenes.push_back({"sedan", 0, 0, 0.0, 1, 4, std::nullopt, Weather::kClear, 12.0});
  const auto pts = sweep_points(s);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].x == 2);
  CHECK(pts[0].y == 10);
  CHECK(pts[0].model == "suv");
  SweepSpec::Explicit outside;
  outside.ix = 3;
  s.scenes.push_back(outside);
  CHECK_THROWS_AS(sweep_points(s), ConfigError);
}

TEST_CASE("empty sample lists are rejected") {
  SweepSpec s;
  s.xs.clear();
  CHECK_THROWS_AS(sweep_points(s), ConfigError);
  s = SweepSpec{};
  s.background_ids.clear();
  CHECK_THROWS_AS(sweep_points(s), ConfigError);
  s = SweepSpec{};
  s.counts = {0};
  CHECK_THROWS_AS(sweep_points(s), ConfigError);
  s = SweepSpec{};
  s.car_models = {"zeppelin"};
  CHECK_THROWS_AS(sweep_points(s), ConfigError);
}

TEST_CASE("sweep files") {
  const SweepFile f = load_sweep(std::filesystem::path(SYNTHLIDAR_SOURCE_DIR) / "configs/blind_spot_sweep.json");
  const auto pts = sweep_points(f.spec);
  CHECK(pts.size() == 2250);
  CHECK(f.spec.xs.front() == -5);
  CHECK(f.spec.xs.back() == 4);
  CHECK(f.spec.ys.front() == 5);
  CHECK(f.spec.ys.back() == 19);
  CHECK(f.base.background_id() == 0);

  const SweepFile g = parse_sweep(R"({"xs": [0], "ys": [10], "yaws": [90], "backgrounds": ["urban-02"]})");
  CHECK(g.spec.yaws[0] == doctest::Approx(std::numbers::pi / 2));
  CHECK(g.spec.background_ids == std::vector<int>{2});
  CHECK_THROWS_AS(parse_sweep(R"({"xs": []})"), ConfigError);
  CHECK_THROWS_AS(parse_sweep(R"({"zs": [1]})"), ConfigError);
}

TEST_CASE("straight ego path at 10 m/s and 10 Hz gives 101 poses 1 m apart") {
  const EgoPath path{{{0, 0, 1.73}, {100, 0, 1.73}}, 10.0};
  const auto poses = ego_scan_poses(path, 10.0);
  REQUIRE(poses.size() == 101);
  for (std::size_t k = 0; k < poses.size(); ++k) {
    CHECK(poses[k].position.x == doctest::Approx(static_cast<double>(k)));
    CHECK(norm(poses[k].forward - Vec3{1, 0, 0}) < 1e-12);
    CHECK(poses[k].is_orthonormal());
  }
}

TEST_CASE("spacing longer than the path gives only the start pose") {
  const EgoPath path{{{3, 4, 1.73}, {8, 4, 1.73}}, 10.0};
  const auto poses = ego_scan_poses(path, 1.0);
  REQUIRE(poses.size() == 1);
  CHECK(poses[0].position == Vec3{3, 4, 1.73});
}

TEST_CASE("headings turn by 90 degrees at the corner of an L path") {
  const EgoPath path{{{0, 0, 1.73}, {40, 0, 1.73}, {40, 20, 1.73}}, 10.0};
  const auto poses = ego_scan_poses(path, 2.0);  // 5 m spacing over 60 m
  REQUIRE(poses.size() == 13);
  for (std::size_t k = 0; k < poses.size(); ++k) {
    const Vec3 expected = k < 8 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    CHECK(norm(poses[k].forward - expected) < 1e-12);
  }
  CHECK(norm(poses[8].position - Vec3{40, 0, 1.73}) < 1e-9);
  CHECK(norm(poses[12].position - Vec3{40, 20, 1.73}) < 1e-9);
  // Consecutive poses are one spacing apart along the path.
  CHECK(norm(poses[9].position - poses[8].position) == doctest::Approx(5.0));
}

TEST_CASE("invalid ego paths") {
  CHECK_THROWS_AS(ego_scan_poses({{{0, 0, 0}}, 10.0}, 10.0), ConfigError);
  CHECK_THROWS_AS(ego_scan_poses({{{0, 0, 0}, {0, 0, 0}}, 10.0}, 10.0), ConfigError);
  CHECK_THROWS_AS(ego_scan_poses({{{0, 0, 0}, {1, 0, 0}}, 0.0}, 10.0), ConfigError);
  CHECK_THROWS_AS(ego_scan_poses({{{0, 0, 0}, {1, 0, 0}}, 10.0}, 0.0), ConfigError);
  CHECK_THROWS_AS(parse_ego_path(R"({"waypoints": [[0, 0]]})"), ConfigError);
}
