#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synthlidar/lidar.hpp"
#include "synthlidar/sweep.hpp"

namespace synthlidar {

/// Per-point class ids, index-aligned with a cloud.
using Prediction = std::vector<std::int32_t>;

/// Ground-truth class ids of a cloud in point order.
Prediction truth_labels(const PointCloud& cloud);

struct ClassMetrics {
  std::int32_t class_id = 0;
  double iou = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0;
};

/// IoU, precision and recall of one class over aligned point labels. A ratio
/// whose denominator is zero is 1 when both the predicted and the true set
/// are empty and 0 otherwise. Throws DataError on a length mismatch.
ClassMetrics class_metrics(std::span<const std::int32_t> pred, std::span<const std::int32_t> truth,
                           std::int32_t class_id);

/// IoU of one cloud at one sweep cell and background.
struct CellResult {
  GridCell cell;
  int background_id = 0;
  double iou = 0.0;
};

/// Per-cell mean IoU over a common set of backgrounds. Values are row-major
/// with rows indexed by iy (the forward offset) and columns by ix.
struct MIoUMap {
  int nx = 0;
  int ny = 0;
  int n = 0;                         // backgrounds averaged per cell
  std::vector<int> backgrounds;      // ascending
  std::vector<double> values;        // ny * nx
  std::vector<int> counts;           // samples per cell; all equal n
  std::vector<double> xs, ys;        // optional axis labels (metres)

  double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy * nx + ix)]; }
  double at(const GridCell& c) const { return at(c.ix, c.iy); }
};

/// Throws DataError when a cell is missing a background, a (cell, background)
/// pair repeats, a cell lies outside nx * ny, or an IoU is outside [0, 1].
MIoUMap miou_map(std::span<const CellResult> results, int nx, int ny);

/// Cells with mIoU strictly below tau, sorted by (iy, ix). Throws ConfigError
/// for tau outside [0, 1].
std::vector<GridCell> select_blind_spots(const MIoUMap& map, double tau);

struct CellDelta {
  GridCell cell;
  double before = 0.0;
  double after = 0.0;
  double delta = 0.0;
};

struct ImprovementReport {
  std::vector<CellDelta> deltas;  // ascending by delta, ties by (iy, ix)
  std::size_t improved = 0, degraded = 0, unchanged = 0;
  double mean_before = 0.0, mean_after = 0.0;
};

/// Throws DataError when the two maps differ in shape or n.
ImprovementReport improvement_report(const MIoUMap& before, const MIoUMap& after);

/// Spearman rank correlation with average ranks for ties; NaN when either
/// sequence is constant.
double spearman(std::span<const double> a, std::span<const double> b);

/// Mean mIoU of each grid row (fixed iy), in iy order.
std::vector<double> row_means(const MIoUMap& map);

// Text renderings. The map CSV has a header of x labels (or column indices)
// and one line per row; the JSON form round-trips through parse_miou_json.
std::string miou_csv(const MIoUMap& map);
std::string miou_json(const MIoUMap& map);
MIoUMap parse_miou_json(std::string_view text);
std::string improvement_csv(const ImprovementReport& report);
std::string cells_csv(std::span<const GridCell> cells);
std::vector<GridCell> parse_cells_csv(std::string_view text);

}  // namespace synthlidar
