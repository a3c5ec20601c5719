#pragma once

#include <span>
#include <vector>

#include "synthlidar/eval.hpp"
#include "synthlidar/lidar.hpp"

namespace synthlidar {

/// Heuristic car segmenter: ground removal by height, single-linkage
/// clustering, and a size window on each cluster's box.
struct BaselineParams {
  double ground_height = 0.25;   // world z at or below this is ground
  double cluster_radius = 0.20;  // single-linkage distance, m
  Vec3 min_size{1.0, 0.0, 0.4};  // (length, width, height), m
  Vec3 max_size{6.0, 3.0, 2.5};

  void validate() const;
  bool operator==(const BaselineParams&) const = default;
};

/// Box of a cluster: length and width of the smallest-area bounding
/// rectangle over orientations sampled every 5 degrees (length >= width), and
/// the vertical extent.
struct ClusterBox {
  double length = 0.0, width = 0.0, height = 0.0;
};

bool fits_window(const ClusterBox& box, const BaselineParams& params);

/// Cluster id per point (-1 for ground points); ids are dense and ordered by
/// each cluster's first point.
std::vector<int> cluster_points(const PointCloud& cloud, double ground_height, double radius);

std::vector<ClusterBox> cluster_boxes(const PointCloud& cloud, const std::vector<int>& cluster_ids);

/// CAR for points of clusters that fit the size window, background otherwise.
Prediction baseline_segment(const PointCloud& cloud, const BaselineParams& params);

/// Candidate values per parameter. Every combination is tried.
struct SearchSpace {
  std::vector<double> ground_heights;
  std::vector<double> cluster_radii;
  std::vector<Vec3> min_sizes;
  std::vector<Vec3> max_sizes;

  std::size_t size() const {
    return ground_heights.size() * cluster_radii.size() * min_sizes.size() * max_sizes.size();
  }
};

/// Default grid around the default parameters.
SearchSpace default_search_space();

struct FitResult {
  BaselineParams params;
  double score = 0.0;  // mean car IoU over the fitting clouds
};

/// Exhaustive search maximizing mean car IoU. Equal scores keep the
/// lexicographically smallest (ground, radius, min size, max size). Throws
/// ConfigError for an empty space and DataError for an empty cloud set.
FitResult fit_baseline(const SearchSpace& space, std::span<const PointCloud> clouds,
                       unsigned workers = 1);

/// Lexicographic order used by the tie rule.
bool params_less(const BaselineParams& a, const BaselineParams& b);

}  // namespace synthlidar
