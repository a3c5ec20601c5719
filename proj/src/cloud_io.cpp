#include "synthlidar/cloud_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <string>

#include "synthlidar/error.hpp"
#include "text_format.hpp"

namespace synthlidar {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

void put_f32(std::vector<std::uint8_t>& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

std::string with_ext(const std::filesystem::path& stem, const char* ext) {
  return stem.string() + ext;
}

}  // namespace

CloudFormat parse_cloud_format(std::string_view name) {
  if (name == "kitti_bin" || name == "kitti" || name == "bin") return CloudFormat::kKittiBin;
  if (name == "ply") return CloudFormat::kPly;
  if (name == "csv") return CloudFormat::kCsv;
  throw ConfigError("unknown cloud format '" + std::string(name) + "' (kitti_bin, ply, csv)");
}

std::string_view to_string(CloudFormat format) {
  switch (format) {
    case CloudFormat::kKittiBin: return "kitti_bin";
    case CloudFormat::kPly: return "ply";
    case CloudFormat::kCsv: return "csv";
  }
  return "kitti_bin";
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

std::vector<std::uint8_t> encode_kitti_bin(const PointCloud& cloud) {
  std::vector<std::uint8_t> out;
  out.reserve(cloud.points.size() * 16);
  for (const LabeledPoint& p : cloud.points) {
    put_f32(out, static_cast<float>(p.xyz.x));
    put_f32(out, static_cast<float>(0.0 - p.xyz.y));
    put_f32(out, static_cast<float>(p.xyz.z));
    put_f32(out, 0.0f);
  }
  return out;
}

std::vector<std::uint8_t> encode_labels(const PointCloud& cloud) {
  std::vector<std::uint8_t> out;
  out.reserve(cloud.points.size() * 4);
  for (const LabeledPoint& p : cloud.points) put_u32(out, pack_label(p.class_id, p.instance_id));
  return out;
}

ExportedFiles export_cloud(const PointCloud& cloud, CloudFormat format,
                           const std::filesystem::path& stem) {
  ExportedFiles files;
  switch (format) {
    case CloudFormat::kKittiBin: {
      files.primary = with_ext(stem, ".bin");
      files.labels = with_ext(stem, ".label");
      write_bytes(files.primary, encode_kitti_bin(cloud));
      write_bytes(files.labels, encode_labels(cloud));
      break;
    }
    case CloudFormat::kPly: {
      files.primary = with_ext(stem, ".ply");
      std::string text;
      text += "ply\nformat ascii 1.0\n";
      text += "comment frame kitti (x forward, y left, z up)\n";
      text += "element vertex " + std::to_string(cloud.points.size()) + "\n";
      text += "property double x\nproperty double y\nproperty double z\n";
      text += "property double range\nproperty int class\nproperty int instance\n";
      text += "end_header\n";
      for (const LabeledPoint& p : cloud.points) {
        text += format_double(p.xyz.x) + ' ' + format_double(0.0 - p.xyz.y) + ' ' +
                format_double(p.xyz.z) + ' ' + format_double(p.range) + ' ' +
                std::to_string(p.class_id) + ' ' + std::to_string(p.instance_id) + '\n';
      }
      write_text(files.primary, text);
      break;
    }
    case CloudFormat::kCsv: {
      files.primary = with_ext(stem, ".csv");
      std::string text = "x,y,z,intensity,range,row,col,class_id,instance_id\n";
      for (const LabeledPoint& p : cloud.points) {
        text += format_double(p.xyz.x) + ',' + format_double(0.0 - p.xyz.y) + ',' +
                format_double(p.xyz.z) + ",0," + format_double(p.range) + ',' +
                std::to_string(p.row) + ',' + std::to_string(p.col) + ',' +
                std::to_string(p.class_id) + ',' + std::to_string(p.instance_id) + '\n';
      }
      write_text(files.primary, text);
      break;
    }
  }
  return files;
}

std::vector<KittiPoint> read_kitti(const std::filesystem::path& bin,
                                   const std::filesystem::path& labels) {
  const auto b = read_bytes(bin);
  const auto l = read_bytes(labels);
  if (b.size() % 16 != 0) throw DataError("'" + bin.string() + "' is not a whole number of points");
  if (l.size() % 4 != 0) throw DataError("'" + labels.string() + "' is not a whole number of labels");
  if (b.size() / 16 != l.size() / 4)
    throw DataError("'" + bin.string() + "' and '" + labels.string() + "' disagree on point count");
  std::vector<KittiPoint> out(b.size() / 16);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint8_t* p = b.data() + 16 * i;
    out[i].x = std::bit_cast<float>(get_u32(p));
    out[i].y = std::bit_cast<float>(get_u32(p + 4));
    out[i].z = std::bit_cast<float>(get_u32(p + 8));
    out[i].intensity = std::bit_cast<float>(get_u32(p + 12));
    const std::uint32_t word = get_u32(l.data() + 4 * i);
    out[i].class_id = static_cast<std::uint16_t>(word & 0xFFFFu);
    out[i].instance_id = static_cast<std::uint16_t>(word >> 16);
  }
  return out;
}

PointCloud cloud_from_kitti(const std::vector<KittiPoint>& records, const LidarConfig& config,
                            const Pose& pose) {
  PointCloud cloud;
  cloud.config = config;
  cloud.pose = pose;
  cloud.points.reserve(records.size());
  for (const KittiPoint& r : records) {
    LabeledPoint p;
    p.xyz = {r.x, 0.0 - static_cast<double>(r.y), r.z};
    p.range = norm(p.xyz);
    p.row = -1;
    p.col = -1;
    p.class_id = r.class_id;
    p.instance_id = r.instance_id;
    cloud.points.push_back(p);
  }
  return cloud;
}

}  // namespace synthlidar
