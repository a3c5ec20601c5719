#include "synthlidar/geom.hpp"

#include "geom_detail.hpp"

namespace synthlidar {

Pose Pose::from_yaw(const Vec3& position, double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  Pose p;
  p.position = position;
  p.forward = {c, s, 0.0};
  p.right = {0.0 - s, c, 0.0};  // avoids -0 in written poses
  p.up = {0.0, 0.0, 1.0};
  return p;
}

bool Pose::is_orthonormal(double tol) const {
  return std::abs(dot(forward, forward) - 1.0) <= tol && std::abs(dot(right, right) - 1.0) <= tol &&
         std::abs(dot(up, up) - 1.0) <= tol && std::abs(dot(forward, right)) <= tol &&
         std::abs(dot(forward, up)) <= tol && std::abs(dot(right, up)) <= tol;
}

bool is_degenerate(const Triangle& tri) { return !(tri.area() > kDegenerateArea); }

std::optional<TriangleHit> ray_triangle_intersect(const Ray& ray, const Triangle& tri) {
  if (is_degenerate(tri)) return std::nullopt;
  const double t = detail::intersect_edges(ray, tri.v0, tri.v1 - tri.v0, tri.v2 - tri.v0);
  if (!(t > 0.0)) return std::nullopt;
  return TriangleHit{t, ray.at(t)};
}

}  // namespace synthlidar
