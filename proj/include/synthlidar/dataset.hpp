#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "synthlidar/eval.hpp"
#include "synthlidar/lidar.hpp"
#include "synthlidar/sweep.hpp"

namespace synthlidar {

/// Provenance of one generated scan. File paths are relative to the
/// directory holding the manifest.
struct ManifestRecord {
  std::size_t index = 0;
  std::string scene_id;
  std::optional<GridCell> cell;
  double x = 0.0, y = 0.0;  // car offset, metres (sweeps only)
  std::string model;
  double yaw_deg = 0.0;
  int count = 0;
  int background_id = -1;
  std::optional<Rgb> color;
  Weather weather = Weather::kClear;
  double time_of_day = 12.0;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::size_t point_count = 0;
  Pose sensor_pose;
  std::map<std::string, std::string> files;  // kind -> relative path
};

struct Manifest {
  std::string config_hash;
  LidarConfig lidar;
  std::vector<double> xs, ys;  // sweep grid axes, empty for single scans
  std::vector<ManifestRecord> records;  // ascending index
};

/// FNV-1a 64-bit digest of `text` as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view text);

std::string record_json(const ManifestRecord& record);
ManifestRecord parse_record_json(std::string_view text);
std::string manifest_json(const Manifest& manifest);
Manifest parse_manifest_json(std::string_view text);

/// Writes through a temporary file and a rename so readers never see a
/// partial file.
void write_text_atomic(const std::filesystem::path& path, std::string_view text);
Manifest read_manifest(const std::filesystem::path& path);

/// Loads the KITTI .bin/.label pair of a record (paths resolved against
/// `root`). Row/col indices are not stored in the files and come back as -1.
PointCloud load_record_cloud(const Manifest& manifest, const ManifestRecord& record,
                             const std::filesystem::path& root);

// Prediction files hold one unsigned byte per point in cloud order.
void write_prediction_file(const std::filesystem::path& path, std::span<const std::int32_t> pred);
/// Throws DataError naming `cloud_id` when the count differs from
/// `expected_points` or a class id is unknown.
Prediction read_prediction_file(const std::filesystem::path& path, std::size_t expected_points,
                                std::string_view cloud_id);
/// One `<scene_id>.pred` per manifest record, in record order.
std::vector<Prediction> read_predictions(const std::filesystem::path& dir, const Manifest& manifest);

struct RetrainSet {
  std::vector<GridCell> cells;
  std::vector<int> validation_backgrounds;
  std::vector<int> retrain_backgrounds;
  std::vector<ManifestRecord> records;  // cell-major, then retrain background order
};

/// Picks the records of every (cell, retrain background) pair. Throws
/// ConfigError when the background sets overlap and DataError when a pair
/// has no record.
RetrainSet build_retrain_set(std::span<const GridCell> cells, const Manifest& manifest,
                             std::span<const int> validation, std::span<const int> retrain);

/// Copies the set's files from `source_root` into `out_dir` and writes
/// `out_dir/manifest.json` plus `out_dir/split.json`. Missing files throw
/// DataError with the path.
void export_retrain_set(const RetrainSet& set, const Manifest& manifest,
                        const std::filesystem::path& source_root, const std::filesystem::path& out_dir);

}  // namespace synthlidar
