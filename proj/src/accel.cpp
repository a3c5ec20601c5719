#include "synthlidar/accel.hpp"

#include <algorithm>
#include <array>
#include <limits>

#include "geom_detail.hpp"

namespace synthlidar {

namespace {

constexpr std::size_t kLeafSize = 4;
constexpr int kBins = 16;
constexpr int kMaxDepth = 60;
constexpr double kTraversalCost = 1.0;
constexpr double kIntersectCost = 1.5;

struct BuildItem {
  Aabb box;
  Vec3 centroid;
  std::uint32_t tri = 0;
};

double surface_area(const Aabb& b) {
  if (b.empty()) return 0.0;
  const Vec3 e = b.extent();
  return 2.0 * (e.x * e.y + e.y * e.z + e.z * e.x);
}

// Slightly inflated so that rounding in the triangle test can never report a
// hit outside a box the traversal has already rejected.
Aabb padded(const Aabb& b) {
  const double scale = std::max({std::abs(b.lo.x), std::abs(b.lo.y), std::abs(b.lo.z),
                                 std::abs(b.hi.x), std::abs(b.hi.y), std::abs(b.hi.z), 1.0});
  const double pad = 1e-9 * scale;
  Aabb out = b;
  out.lo = out.lo - Vec3{pad, pad, pad};
  out.hi = out.hi + Vec3{pad, pad, pad};
  return out;
}

struct RaySlabs {
  Vec3 origin;
  std::array<double, 3> inv{};
  std::array<bool, 3> zero{};

  explicit RaySlabs(const Ray& ray) : origin(ray.origin) {
    for (int a = 0; a < 3; ++a) {
      const double d = ray.direction[a];
      zero[a] = d == 0.0;
      inv[a] = zero[a] ? 0.0 : 1.0 / d;
    }
  }

  // Entry distance into [lo, hi], or +inf when the box is missed within
  // [0, limit].
  double enter(const Vec3& lo, const Vec3& hi, double limit) const {
    double t0 = 0.0;
    double t1 = limit;
    for (int a = 0; a < 3; ++a) {
      const double o = origin[a];
      if (zero[a]) {
        if (o < lo[a] || o > hi[a]) return std::numeric_limits<double>::infinity();
        continue;
      }
      double near = (lo[a] - o) * inv[a];
      double far = (hi[a] - o) * inv[a];
      if (near > far) std::swap(near, far);
      far *= 1.0 + 1e-12;
      t0 = near > t0 ? near : t0;
      t1 = far < t1 ? far : t1;
      if (t0 > t1) return std::numeric_limits<double>::infinity();
    }
    return t0;
  }
};

}  // namespace

AccelIndex build_accel(std::span<const Triangle> triangles, std::span<const ObjectLabel> labels) {
  AccelIndex index;
  index.labels_.assign(labels.begin(), labels.end());

  std::vector<BuildItem> items;
  items.reserve(triangles.size());
  for (std::size_t i = 0; i < triangles.size(); ++i) {
    const Triangle& t = triangles[i];
    if (is_degenerate(t)) continue;
    BuildItem item;
    item.box = t.bounds();
    item.centroid = item.box.center();
    item.tri = static_cast<std::uint32_t>(i);
    items.push_back(item);
  }
  if (items.empty()) return index;

  index.nodes_.reserve(2 * items.size() / kLeafSize + 1);

  struct Task {
    std::size_t begin, end;
    std::uint32_t node;
    int depth;
  };
  std::vector<Task> stack;
  index.nodes_.emplace_back();
  stack.push_back({0, items.size(), 0, 0});

  while (!stack.empty()) {
    const Task task = stack.back();
    stack.pop_back();

    Aabb box, centroid_box;
    for (std::size_t i = task.begin; i < task.end; ++i) {
      box.extend(items[i].box);
      centroid_box.extend(items[i].centroid);
    }
    const Aabb pbox = padded(box);
    index.nodes_[task.node].lo = pbox.lo;
    index.nodes_[task.node].hi = pbox.hi;

    const std::size_t n = task.end - task.begin;
    auto make_leaf = [&]() {
      auto& node = index.nodes_[task.node];
      node.offset = static_cast<std::uint32_t>(index.tris_.size());
      node.count = static_cast<std::uint32_t>(n);
      for (std::size_t i = task.begin; i < task.end; ++i) {
        const Triangle& t = triangles[items[i].tri];
        index.tris_.push_back({t.v0, t.v1 - t.v0, t.v2 - t.v0, t.object_index, items[i].tri});
      }
    };
    if (n <= kLeafSize || task.depth >= kMaxDepth) {
      make_leaf();
      continue;
    }

    // Binned SAH over the axis of largest centroid spread, then the others.
    const Vec3 ce = centroid_box.extent();
    std::array<int, 3> axes{0, 1, 2};
    std::stable_sort(axes.begin(), axes.end(), [&](int a, int b) { return ce[a] > ce[b]; });

    int best_axis = -1;
    int best_split = 0;
    double best_cost = kIntersectCost * static_cast<double>(n);
    for (int axis : axes) {
      const double extent = ce[axis];
      if (!(extent > 0.0)) continue;
      std::array<Aabb, kBins> bin_box;
      std::array<std::size_t, kBins> bin_count{};
      const double scale = kBins / extent;
      auto bin_of = [&](const BuildItem& it) {
        int b = static_cast<int>((it.centroid[axis] - centroid_box.lo[axis]) * scale);
        return std::clamp(b, 0, kBins - 1);
      };
      for (std::size_t i = task.begin; i < task.end; ++i) {
        const int b = bin_of(items[i]);
        bin_box[b].extend(items[i].box);
        ++bin_count[b];
      }
      std::array<double, kBins> right_area{};
      std::array<std::size_t, kBins> right_count{};
      Aabb acc;
      std::size_t cnt = 0;
      for (int b = kBins - 1; b > 0; --b) {
        acc.extend(bin_box[b]);
        cnt += bin_count[b];
        right_area[b] = surface_area(acc);
        right_count[b] = cnt;
      }
      acc = Aabb{};
      cnt = 0;
      const double parent_area = surface_area(box);
      for (int b = 0; b < kBins - 1; ++b) {
        acc.extend(bin_box[b]);
        cnt += bin_count[b];
        if (cnt == 0 || right_count[b + 1] == 0) continue;
        const double cost =
            kTraversalCost + kIntersectCost *
                                 (surface_area(acc) * static_cast<double>(cnt) +
                                  right_area[b + 1] * static_cast<double>(right_count[b + 1])) /
                                 parent_area;
        if (cost < best_cost) {
          best_cost = cost;
          best_axis = axis;
          best_split = b + 1;
        }
      }
    }

    std::size_t mid = 0;
    if (best_axis >= 0) {
      const double scale = kBins / ce[best_axis];
      const double lo = centroid_box.lo[best_axis];
      auto it = std::stable_partition(
          items.begin() + static_cast<std::ptrdiff_t>(task.begin),
          items.begin() + static_cast<std::ptrdiff_t>(task.end), [&](const BuildItem& item) {
            int b = static_cast<int>((item.centroid[best_axis] - lo) * scale);
            return std::clamp(b, 0, kBins - 1) < best_split;
          });
      mid = static_cast<std::size_t>(it - items.begin());
    } else if (n > 4 * kLeafSize && ce[axes[0]] > 0.0) {
      // SAH says "leaf" but the leaf would be large: fall back to a median split.
      const int axis = axes[0];
      mid = task.begin + n / 2;
      std::nth_element(items.begin() + static_cast<std::ptrdiff_t>(task.begin),
                       items.begin() + static_cast<std::ptrdiff_t>(mid),
                       items.begin() + static_cast<std::ptrdiff_t>(task.end),
                       [axis](const BuildItem& a, const BuildItem& b) {
                         if (a.centroid[axis] != b.centroid[axis])
                           return a.centroid[axis] < b.centroid[axis];
                         return a.tri < b.tri;
                       });
      best_axis = axis;
    }
    if (best_axis < 0 || mid == task.begin || mid == task.end) {
      make_leaf();
      continue;
    }

    const auto left = static_cast<std::uint32_t>(index.nodes_.size());
    index.nodes_.emplace_back();
    const auto right = static_cast<std::uint32_t>(index.nodes_.size());
    index.nodes_.emplace_back();
    index.nodes_[task.node].offset = right;
    index.nodes_[task.node].count = 0;
    index.nodes_[task.node].axis = static_cast<std::uint32_t>(best_axis);
    // Left child is always task.node's offset - 1.
    stack.push_back({mid, task.end, right, task.depth + 1});
    stack.push_back({task.begin, mid, left, task.depth + 1});
  }
  return index;
}

Aabb AccelIndex::bounds() const {
  if (nodes_.empty()) return {};
  return {nodes_.front().lo, nodes_.front().hi};
}

template <typename Visit>
void AccelIndex::traverse(const Ray& ray, double& bound, Visit&& visit) const {
  if (nodes_.empty()) return;
  const RaySlabs slabs(ray);
  if (slabs.enter(nodes_[0].lo, nodes_[0].hi, bound) == std::numeric_limits<double>::infinity())
    return;

  std::array<std::uint32_t, 2 * kMaxDepth + 8> stack{};
  std::size_t top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.count > 0) {
      for (std::uint32_t i = node.offset; i < node.offset + node.count; ++i) visit(tris_[i]);
      continue;
    }
    const std::uint32_t left_index = node.offset - 1;
    const std::uint32_t right_index = node.offset;
    const Node& l = nodes_[left_index];
    const Node& r = nodes_[right_index];
    const double tl = slabs.enter(l.lo, l.hi, bound);
    const double tr = slabs.enter(r.lo, r.hi, bound);
    const bool hit_l = tl != std::numeric_limits<double>::infinity();
    const bool hit_r = tr != std::numeric_limits<double>::infinity();
    if (hit_l && hit_r) {
      if (tl <= tr) {
        stack[top++] = right_index;
        stack[top++] = left_index;
      } else {
        stack[top++] = left_index;
        stack[top++] = right_index;
      }
    } else if (hit_l) {
      stack[top++] = left_index;
    } else if (hit_r) {
      stack[top++] = right_index;
    }
  }
}

Hit AccelIndex::make_hit(const Ray& ray, double t, const PackedTriangle& tri) const {
  const std::int32_t object_index = tri.object_index;
  Hit hit;
  hit.distance = t;
  hit.point = ray.at(t);
  hit.normal = normalized(cross(tri.e1, tri.e2));
  hit.object_index = object_index;
  if (object_index >= 0 && static_cast<std::size_t>(object_index) < labels_.size()) {
    hit.class_id = labels_[static_cast<std::size_t>(object_index)].class_id;
    hit.instance_id = labels_[static_cast<std::size_t>(object_index)].instance_id;
  }
  return hit;
}

std::optional<Hit> AccelIndex::first_hit(const Ray& ray) const {
  double best_t = std::numeric_limits<double>::infinity();
  const PackedTriangle* best = nullptr;
  bool near_tie = false;
  // Boxes are pruned against best_t + tolerance so every potential tie is seen.
  double bound = ray.max_range;

  traverse(ray, bound, [&](const PackedTriangle& tri) {
    const double t = detail::intersect_edges(ray, tri.v0, tri.e1, tri.e2);
    if (t < 0.0) return;
    if (t < best_t) {
      if (best_t - t < kTieTolerance) near_tie = true;
      best_t = t;
      best = &tri;
      bound = std::min(ray.max_range, best_t + kTieTolerance);
    } else if (t - best_t < kTieTolerance) {
      near_tie = true;
    }
  });
  if (best == nullptr) return std::nullopt;

  if (near_tie) {
    // Second pass: lowest (object_index, source_index) among hits that lie
    // within tolerance of the nearest distance.
    const double limit = best_t;
    double tie_bound = std::min(ray.max_range, limit + kTieTolerance);
    const PackedTriangle* pick = nullptr;
    double pick_t = 0.0;
    traverse(ray, tie_bound, [&](const PackedTriangle& tri) {
      const double t = detail::intersect_edges(ray, tri.v0, tri.e1, tri.e2);
      if (t < 0.0 || !(t - limit < kTieTolerance)) return;
      if (pick == nullptr || tri.object_index < pick->object_index ||
          (tri.object_index == pick->object_index && tri.source_index < pick->source_index)) {
        pick = &tri;
        pick_t = t;
      }
    });
    return make_hit(ray, pick_t, *pick);
  }
  return make_hit(ray, best_t, *best);
}

}  // namespace synthlidar
