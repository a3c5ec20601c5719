#include "synthlidar/segment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <unordered_map>

#include "synthlidar/error.hpp"
#include "synthlidar/parallel.hpp"
#include "synthlidar/scene.hpp"

namespace synthlidar {

namespace {

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const {
    std::uint64_t h = 14695981039346656037ull;
    for (std::int64_t v : {k.x, k.y, k.z}) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

std::vector<Vec3> world_points(const PointCloud& cloud) {
  std::vector<Vec3> out;
  out.reserve(cloud.points.size());
  for (const LabeledPoint& p : cloud.points) out.push_back(cloud.pose.to_world(p.xyz));
  return out;
}

bool vec_less(const Vec3& a, const Vec3& b) {
  if (a.x != b.x) return a.x < b.x;
  if (a.y != b.y) return a.y < b.y;
  return a.z < b.z;
}

// Per-cluster tallies needed to score any size window without re-clustering.
struct ClusterStats {
  std::vector<ClusterBox> boxes;
  std::vector<std::size_t> size;
  std::vector<std::size_t> cars;
  std::size_t total_cars = 0;
};

ClusterStats cluster_stats(const PointCloud& cloud, double ground, double radius) {
  const auto ids = cluster_points(cloud, ground, radius);
  ClusterStats s;
  s.boxes = cluster_boxes(cloud, ids);
  s.size.assign(s.boxes.size(), 0);
  s.cars.assign(s.boxes.size(), 0);
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const bool car = cloud.points[k].class_id == classes::kCar;
    if (car) ++s.total_cars;
    if (ids[k] < 0) continue;
    ++s.size[static_cast<std::size_t>(ids[k])];
    if (car) ++s.cars[static_cast<std::size_t>(ids[k])];
  }
  return s;
}

double window_iou(const ClusterStats& s, const BaselineParams& params) {
  std::size_t tp = 0, predicted = 0;
  for (std::size_t c = 0; c < s.boxes.size(); ++c) {
    if (!fits_window(s.boxes[c], params)) continue;
    tp += s.cars[c];
    predicted += s.size[c];
  }
  const std::size_t uni = predicted + s.total_cars - tp;
  if (uni == 0) return 1.0;
  return static_cast<double>(tp) / static_cast<double>(uni);
}

}  // namespace

void BaselineParams::validate() const {
  if (!std::isfinite(ground_height)) throw ConfigError("ground_height must be finite");
  if (!(cluster_radius > 0.0) || !std::isfinite(cluster_radius))
    throw ConfigError("cluster_radius must be positive");
  for (int a = 0; a < 3; ++a)
    if (!(min_size[a] >= 0.0 && min_size[a] <= max_size[a]))
      throw ConfigError("size window must satisfy 0 <= min <= max on every axis");
}

bool fits_window(const ClusterBox& box, const BaselineParams& p) {
  return box.length >= p.min_size.x && box.length <= p.max_size.x && box.width >= p.min_size.y &&
         box.width <= p.max_size.y && box.height >= p.min_size.z && box.height <= p.max_size.z;
}

std::vector<int> cluster_points(const PointCloud& cloud, double ground_height, double radius) {
  if (!(radius > 0.0)) throw ConfigError("cluster_radius must be positive");
  const auto world = world_points(cloud);
  const std::size_t n = world.size();
  std::vector<int> ids(n, -1);

  std::vector<std::size_t> live;
  for (std::size_t k = 0; k < n; ++k)
    if (world[k].z > ground_height) live.push_back(k);

  std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> grid;
  grid.reserve(live.size());
  auto key_of = [&](const Vec3& p) {
    return CellKey{static_cast<std::int64_t>(std::floor(p.x / radius)),
                   static_cast<std::int64_t>(std::floor(p.y / radius)),
                   static_cast<std::int64_t>(std::floor(p.z / radius))};
  };
  for (std::size_t k : live) grid[key_of(world[k])].push_back(k);

  UnionFind uf(n);
  const double r2 = radius * radius;
  for (std::size_t k : live) {
    const CellKey c = key_of(world[k]);
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy)
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          const auto it = grid.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == grid.end()) continue;
          for (std::size_t q : it->second) {
            if (q <= k) continue;
            const Vec3 d = world[q] - world[k];
            if (dot(d, d) <= r2) uf.unite(k, q);
          }
        }
  }

  std::unordered_map<std::size_t, int> dense;
  for (std::size_t k : live) {
    const auto [it, inserted] = dense.emplace(uf.find(k), static_cast<int>(dense.size()));
    ids[k] = it->second;
  }
  return ids;
}

std::vector<ClusterBox> cluster_boxes(const PointCloud& cloud, const std::vector<int>& ids) {
  if (ids.size() != cloud.points.size()) throw DataError("cluster ids do not match the cloud");
  const auto world = world_points(cloud);
  int count = 0;
  for (int id : ids) count = std::max(count, id + 1);

  constexpr int kAngles = 18;  // 0, 5, ..., 85 degrees
  struct Extent {
    double lo[kAngles][2], hi[kAngles][2];
    double zlo = 0, zhi = 0;
    bool any = false;
  };
  std::vector<Extent> ext(static_cast<std::size_t>(count));
  double cs[kAngles], sn[kAngles];
  for (int a = 0; a < kAngles; ++a) {
    const double ang = a * 5.0 * std::numbers::pi / 180.0;
    cs[a] = std::cos(ang);
    sn[a] = std::sin(ang);
  }
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (ids[k] < 0) continue;
    Extent& e = ext[static_cast<std::size_t>(ids[k])];
    const Vec3& p = world[k];
    for (int a = 0; a < kAngles; ++a) {
      const double u = cs[a] * p.x + sn[a] * p.y;
      const double v = -sn[a] * p.x + cs[a] * p.y;
      if (!e.any) {
        e.lo[a][0] = e.hi[a][0] = u;
        e.lo[a][1] = e.hi[a][1] = v;
      } else {
        e.lo[a][0] = std::min(e.lo[a][0], u);
        e.hi[a][0] = std::max(e.hi[a][0], u);
        e.lo[a][1] = std::min(e.lo[a][1], v);
        e.hi[a][1] = std::max(e.hi[a][1], v);
      }
    }
    if (!e.any) {
      e.zlo = e.zhi = p.z;
    } else {
      e.zlo = std::min(e.zlo, p.z);
      e.zhi = std::max(e.zhi, p.z);
    }
    e.any = true;
  }

  std::vector<ClusterBox> boxes(static_cast<std::size_t>(count));
  for (std::size_t c = 0; c < ext.size(); ++c) {
    const Extent& e = ext[c];
    double best_area = 0.0;
    for (int a = 0; a < kAngles; ++a) {
      const double du = e.hi[a][0] - e.lo[a][0];
      const double dv = e.hi[a][1] - e.lo[a][1];
      if (a == 0 || du * dv < best_area) {
        best_area = du * dv;
        boxes[c].length = std::max(du, dv);
        boxes[c].width = std::min(du, dv);
      }
    }
    boxes[c].height = e.zhi - e.zlo;
  }
  return boxes;
}

Prediction baseline_segment(const PointCloud& cloud, const BaselineParams& params) {
  params.validate();
  const auto ids = cluster_points(cloud, params.ground_height, params.cluster_radius);
  const auto boxes = cluster_boxes(cloud, ids);
  Prediction out(cloud.points.size(), classes::kBackground);
  for (std::size_t k = 0; k < ids.size(); ++k)
    if (ids[k] >= 0 && fits_window(boxes[static_cast<std::size_t>(ids[k])], params))
      out[k] = classes::kCar;
  return out;
}

SearchSpace default_search_space() {
  SearchSpace s;
  s.ground_heights = {0.25};
  s.cluster_radii = {0.10, 0.15, 0.20, 0.30, 0.40, 0.50, 0.60, 0.80, 1.00};
  s.min_sizes = {{1.0, 0.0, 0.4}, {1.0, 0.0, 0.2}};
  s.max_sizes = {{6.0, 3.0, 2.5}};
  return s;
}

bool params_less(const BaselineParams& a, const BaselineParams& b) {
  if (a.ground_height != b.ground_height) return a.ground_height < b.ground_height;
  if (a.cluster_radius != b.cluster_radius) return a.cluster_radius < b.cluster_radius;
  if (!(a.min_size == b.min_size)) return vec_less(a.min_size, b.min_size);
  return vec_less(a.max_size, b.max_size);
}

FitResult fit_baseline(const SearchSpace& space, std::span<const PointCloud> clouds, unsigned workers) {
  if (space.size() == 0) throw ConfigError("baseline search space is empty");
  if (clouds.empty()) throw DataError("cannot fit the baseline on an empty cloud set");

  auto sorted = [](auto v, auto less) {
    std::sort(v.begin(), v.end(), less);
    return v;
  };
  const auto gs = sorted(space.ground_heights, std::less<double>());
  const auto rs = sorted(space.cluster_radii, std::less<double>());
  const auto mins = sorted(space.min_sizes, vec_less);
  const auto maxs = sorted(space.max_sizes, vec_less);

  FitResult best;
  bool have = false;
  std::vector<ClusterStats> stats(clouds.size());
  for (double g : gs)
    for (double r : rs) {
      parallel_for(clouds.size(), workers,
                   [&](std::size_t k) { stats[k] = cluster_stats(clouds[k], g, r); });
      for (const Vec3& lo : mins)
        for (const Vec3& hi : maxs) {
          BaselineParams p{g, r, lo, hi};
          p.validate();
          double sum = 0.0;
          for (const ClusterStats& s : stats) sum += window_iou(s, p);
          const double score = sum / static_cast<double>(stats.size());
          if (!have || score > best.score) {
            best = {p, score};
            have = true;
          }
        }
    }
  return best;
}

}  // namespace synthlidar
