#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "synthlidar/lidar.hpp"

namespace synthlidar {

enum class CloudFormat { kKittiBin, kPly, kCsv };

CloudFormat parse_cloud_format(std::string_view name);
std::string_view to_string(CloudFormat format);

/// Label word of the companion label file: class in the low 16 bits,
/// instance in the high 16 bits.
constexpr std::uint32_t pack_label(std::int32_t class_id, std::int32_t instance_id) {
  return (static_cast<std::uint32_t>(class_id) & 0xFFFFu) |
         ((static_cast<std::uint32_t>(instance_id) & 0xFFFFu) << 16);
}

/// Files written for one format. kitti_bin writes `<stem>.bin` plus
/// `<stem>.label`; ply and csv write `<stem>.ply` / `<stem>.csv`.
struct ExportedFiles {
  std::filesystem::path primary;
  std::filesystem::path labels;  // kitti_bin only
};

/// All formats use the KITTI axis convention (x forward, y left, z up): the
/// internal y (right) is negated. Intensity is always 0. Throws DataError with
/// the path on I/O failure.
ExportedFiles export_cloud(const PointCloud& cloud, CloudFormat format,
                           const std::filesystem::path& stem);

/// Raw bytes of the KITTI velodyne encoding: little-endian float32 quadruples
/// (x, y, z, intensity).
std::vector<std::uint8_t> encode_kitti_bin(const PointCloud& cloud);
std::vector<std::uint8_t> encode_labels(const PointCloud& cloud);

struct KittiPoint {
  float x = 0, y = 0, z = 0, intensity = 0;  // KITTI frame
  std::uint16_t class_id = 0;
  std::uint16_t instance_id = 0;
};

/// Reads a .bin/.label pair. Throws DataError on missing files or when the
/// two files disagree on the point count.
std::vector<KittiPoint> read_kitti(const std::filesystem::path& bin,
                                   const std::filesystem::path& labels);

/// Rebuilds an (unordered-grid) cloud from KITTI records: y is flipped back to
/// the internal frame, range is recomputed, row/col are set to -1.
PointCloud cloud_from_kitti(const std::vector<KittiPoint>& records, const LidarConfig& config,
                            const Pose& pose);

/// Writes bytes, throwing DataError with the path on failure.
void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);

}  // namespace synthlidar
