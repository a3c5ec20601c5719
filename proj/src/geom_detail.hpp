#pragma once

#include "synthlidar/geom.hpp"

namespace synthlidar::detail {

// Moller-Trumbore against a triangle given as a vertex and two edges.
// Returns the hit distance, or -1 when there is no hit in range. Shared by the
// direct test and the accelerated index so both produce identical bits.
inline double intersect_edges(const Ray& ray, const Vec3& v0, const Vec3& e1, const Vec3& e2) {
  const Vec3 p = cross(ray.direction, e2);
  const double det = dot(e1, p);
  if (det == 0.0 || !std::isfinite(det)) return -1.0;
  const double inv_det = 1.0 / det;
  const Vec3 s = ray.origin - v0;
  const double u = dot(s, p) * inv_det;
  if (u < 0.0 || u > 1.0) return -1.0;
  const Vec3 q = cross(s, e1);
  const double v = dot(ray.direction, q) * inv_det;
  if (v < 0.0 || u + v > 1.0) return -1.0;
  const double t = dot(e2, q) * inv_det;
  if (t <= kSelfHitEpsilon || t > ray.max_range) return -1.0;
  return t;
}

}  // namespace synthlidar::detail
