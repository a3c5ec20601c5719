#pragma once

// Shared generators and oracles for the unit tests. The oracles recompute
// results from first principles instead of calling the code under test.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "synthlidar/geom.hpp"
#include "synthlidar/rng.hpp"

namespace testing {

using namespace synthlidar;

inline Vec3 random_point(Rng& rng, double lo, double hi) {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

inline Vec3 random_unit(Rng& rng) {
  for (;;) {
    const Vec3 v = random_point(rng, -1.0, 1.0);
    const double n = norm(v);
    if (n > 0.1 && n <= 1.0) return v / n;
  }
}

/// Small random triangles scattered in a cube, grouped into objects.
inline std::vector<Triangle> random_triangles(Rng& rng, std::size_t count, int objects,
                                              double extent = 20.0, double size = 1.5) {
  std::vector<Triangle> tris;
  for (std::size_t k = 0; k < count; ++k) {
    const Vec3 c = random_point(rng, -extent, extent);
    Triangle t;
    t.v0 = c + random_point(rng, -size, size);
    t.v1 = c + random_point(rng, -size, size);
    t.v2 = c + random_point(rng, -size, size);
    t.object_index = static_cast<std::int32_t>(rng.integer(0, objects - 1));
    tris.push_back(t);
  }
  return tris;
}

struct OracleHit {
  double t;
  std::int32_t object_index;
  std::size_t triangle;
};

/// Nearest hit over every triangle; hits within 1e-9 of the nearest are
/// resolved by (object_index, triangle index).
inline std::optional<OracleHit> brute_force_first_hit(const std::vector<Triangle>& tris, const Ray& ray) {
  std::vector<OracleHit> hits;
  for (std::size_t k = 0; k < tris.size(); ++k)
    if (const auto h = ray_triangle_intersect(ray, tris[k])) hits.push_back({h->t, tris[k].object_index, k});
  if (hits.empty()) return std::nullopt;
  double tmin = hits[0].t;
  for (const auto& h : hits) tmin = std::min(tmin, h.t);
  std::optional<OracleHit> best;
  for (const auto& h : hits) {
    if (!(h.t - tmin < kTieTolerance)) continue;
    if (!best || h.object_index < best->object_index ||
        (h.object_index == best->object_index && h.triangle < best->triangle))
      best = h;
  }
  return best;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("synthlidar_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing
