#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "synthlidar/geom.hpp"

namespace synthlidar {

/// Semantic label attached to every triangle through its object_index.
struct ObjectLabel {
  std::int32_t class_id = 0;
  std::int32_t instance_id = 0;
  bool operator==(const ObjectLabel&) const = default;
};

/// Immutable axis-aligned bounding-box tree over a triangle soup.
///
/// first_hit returns the nearest intersection. Hits whose distances lie
/// within kTieTolerance of the nearest one are resolved by the lowest
/// object_index, then the lowest input triangle index, so the answer does not
/// depend on traversal order.
class AccelIndex {
 public:
  AccelIndex() = default;

  std::optional<Hit> first_hit(const Ray& ray) const;

  std::size_t triangle_count() const { return tris_.size(); }
  std::size_t node_count() const { return nodes_.size(); }
  Aabb bounds() const;

 private:
  friend AccelIndex build_accel(std::span<const Triangle> triangles,
                                std::span<const ObjectLabel> labels);

  struct Node {
    Vec3 lo, hi;
    std::uint32_t offset = 0;  // first triangle (leaf) or second child (interior)
    std::uint32_t count = 0;   // 0 for interior nodes
    std::uint32_t axis = 0;
  };
  struct PackedTriangle {
    Vec3 v0, e1, e2;
    std::int32_t object_index = 0;
    std::uint32_t source_index = 0;
  };

  template <typename Visit>
  void traverse(const Ray& ray, double& bound, Visit&& visit) const;

  Hit make_hit(const Ray& ray, double t, const PackedTriangle& tri) const;

  std::vector<Node> nodes_;
  std::vector<PackedTriangle> tris_;
  std::vector<ObjectLabel> labels_;
};

/// Builds the index over all non-degenerate triangles. `labels[k]` supplies
/// class/instance ids for object_index k; objects without an entry report
/// class 0 / instance 0. Deterministic for a fixed input order.
AccelIndex build_accel(std::span<const Triangle> triangles,
                       std::span<const ObjectLabel> labels = {});

inline std::optional<Hit> first_hit(const AccelIndex& index, const Ray& ray) {
  return index.first_hit(ray);
}

}  // namespace synthlidar
