#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

namespace synthlidar {

// World frame: X forward, Y right, Z up. Nothing in the library relies on the
// handedness of this triple.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3() = default;
  constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  constexpr double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr bool operator==(const Vec3&) const = default;
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }
constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline Vec3 normalized(const Vec3& v) { return v / norm(v); }
constexpr Vec3 min(const Vec3& a, const Vec3& b) {
  return {a.x < b.x ? a.x : b.x, a.y < b.y ? a.y : b.y, a.z < b.z ? a.z : b.z};
}
constexpr Vec3 max(const Vec3& a, const Vec3& b) {
  return {a.x > b.x ? a.x : b.x, a.y > b.y ? a.y : b.y, a.z > b.z ? a.z : b.z};
}

/// Rigid sensor/object pose given as an origin plus the world-frame images of
/// the local forward, right and up axes.
struct Pose {
  Vec3 position{};
  Vec3 forward{1, 0, 0};
  Vec3 right{0, 1, 0};
  Vec3 up{0, 0, 1};

  /// Heading `yaw` radians about +Z; positive yaw turns forward toward +Y.
  static Pose from_yaw(const Vec3& position, double yaw);

  Vec3 to_world(const Vec3& local) const {
    return position + local.x * forward + local.y * right + local.z * up;
  }
  Vec3 rotate_to_world(const Vec3& local) const {
    return local.x * forward + local.y * right + local.z * up;
  }
  Vec3 to_local(const Vec3& world) const {
    const Vec3 d = world - position;
    return {dot(d, forward), dot(d, right), dot(d, up)};
  }

  bool is_orthonormal(double tol = 1e-9) const;
  bool operator==(const Pose&) const = default;
};

struct Aabb {
  Vec3 lo{INFINITY, INFINITY, INFINITY};
  Vec3 hi{-INFINITY, -INFINITY, -INFINITY};

  void extend(const Vec3& p) {
    lo = min(lo, p);
    hi = max(hi, p);
  }
  void extend(const Aabb& b) {
    lo = min(lo, b.lo);
    hi = max(hi, b.hi);
  }
  bool empty() const { return lo.x > hi.x; }
  Vec3 extent() const { return hi - lo; }
  Vec3 center() const { return (lo + hi) * 0.5; }
  bool overlaps(const Aabb& o) const {
    return lo.x <= o.hi.x && o.lo.x <= hi.x && lo.y <= o.hi.y && o.lo.y <= hi.y && lo.z <= o.hi.z &&
           o.lo.z <= hi.z;
  }
};

struct Ray {
  Vec3 origin{};
  Vec3 direction{1, 0, 0};
  double max_range = 1.0;

  Vec3 at(double t) const { return origin + t * direction; }
};

struct Triangle {
  Vec3 v0{}, v1{}, v2{};
  std::int32_t object_index = 0;

  double area() const { return 0.5 * norm(cross(v1 - v0, v2 - v0)); }
  Aabb bounds() const {
    Aabb b;
    b.extend(v0);
    b.extend(v1);
    b.extend(v2);
    return b;
  }
};

struct Hit {
  Vec3 point{};
  double distance = 0.0;
  Vec3 normal{};  // unit surface normal, sign arbitrary (both faces are hit)
  std::int32_t object_index = 0;
  std::int32_t class_id = 0;
  std::int32_t instance_id = 0;
};

struct TriangleHit {
  double t = 0.0;
  Vec3 point{};
};

inline constexpr double kSelfHitEpsilon = 1e-6;     // m, near-clip guard
inline constexpr double kDegenerateArea = 1e-12;    // m^2
inline constexpr double kTieTolerance = 1e-9;       // m, equal-distance hits

bool is_degenerate(const Triangle& tri);

/// Smallest t in (kSelfHitEpsilon, ray.max_range] at which the ray meets the
/// triangle. Both faces are hit and edges count as inside. Degenerate
/// triangles never hit.
std::optional<TriangleHit> ray_triangle_intersect(const Ray& ray, const Triangle& tri);

}  // namespace synthlidar
