#include "synthlidar/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"
#include "synthlidar/error.hpp"
#include "text_format.hpp"

namespace synthlidar {

namespace {

double ratio(std::size_t num, std::size_t den, bool both_empty) {
  if (den == 0) return both_empty ? 1.0 : 0.0;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::string cell_text(const GridCell& c) {
  return "(" + std::to_string(c.ix) + ", " + std::to_string(c.iy) + ")";
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

Prediction truth_labels(const PointCloud& cloud) {
  Prediction out;
  out.reserve(cloud.points.size());
  for (const LabeledPoint& p : cloud.points) out.push_back(p.class_id);
  return out;
}

ClassMetrics class_metrics(std::span<const std::int32_t> pred, std::span<const std::int32_t> truth,
                           std::int32_t class_id) {
  if (pred.size() != truth.size())
    throw DataError("prediction has " + std::to_string(pred.size()) + " labels but the cloud has " +
                    std::to_string(truth.size()) + " points");
  ClassMetrics m;
  m.class_id = class_id;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const bool p = pred[k] == class_id;
    const bool g = truth[k] == class_id;
    if (p && g) ++m.tp;
    else if (p) ++m.fp;
    else if (g) ++m.fn;
  }
  const bool both_empty = m.tp + m.fp == 0 && m.tp + m.fn == 0;
  m.iou = ratio(m.tp, m.tp + m.fp + m.fn, both_empty);
  m.precision = ratio(m.tp, m.tp + m.fp, both_empty);
  m.recall = ratio(m.tp, m.tp + m.fn, both_empty);
  return m;
}

MIoUMap miou_map(std::span<const CellResult> results, int nx, int ny) {
  if (nx <= 0 || ny <= 0) throw DataError("mIoU map needs a non-empty grid");
  std::set<int> backgrounds;
  for (const CellResult& r : results) backgrounds.insert(r.background_id);

  const auto cells = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  std::vector<std::map<int, double>> per_cell(cells);
  for (const CellResult& r : results) {
    if (r.cell.ix < 0 || r.cell.ix >= nx || r.cell.iy < 0 || r.cell.iy >= ny)
      throw DataError("cell " + cell_text(r.cell) + " lies outside the " + std::to_string(nx) + "x" +
                      std::to_string(ny) + " grid");
    if (!(r.iou >= 0.0 && r.iou <= 1.0))
      throw DataError("IoU at cell " + cell_text(r.cell) + " is outside [0, 1]");
    auto& slot = per_cell[static_cast<std::size_t>(r.cell.iy * nx + r.cell.ix)];
    if (!slot.emplace(r.background_id, r.iou).second)
      throw DataError("cell " + cell_text(r.cell) + " has two results for background " +
                      std::to_string(r.background_id));
  }

  MIoUMap map;
  map.nx = nx;
  map.ny = ny;
  map.n = static_cast<int>(backgrounds.size());
  map.backgrounds.assign(backgrounds.begin(), backgrounds.end());
  map.values.assign(cells, 0.0);
  map.counts.assign(cells, 0);
  for (std::size_t k = 0; k < cells; ++k) {
    const auto& slot = per_cell[k];
    if (slot.size() != backgrounds.size() || backgrounds.empty()) {
      const GridCell c{static_cast<int>(k) % nx, static_cast<int>(k) / nx};
      throw DataError("ragged coverage: cell " + cell_text(c) + " has " + std::to_string(slot.size()) +
                      " of " + std::to_string(backgrounds.size()) + " backgrounds");
    }
    double sum = 0.0;
    for (const auto& [bg, iou] : slot) sum += iou;
    map.values[k] = sum / static_cast<double>(slot.size());
    map.counts[k] = static_cast<int>(slot.size());
  }
  return map;
}

std::vector<GridCell> select_blind_spots(const MIoUMap& map, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("threshold must lie in [0, 1]");
  std::vector<GridCell> out;
  for (int iy = 0; iy < map.ny; ++iy)
    for (int ix = 0; ix < map.nx; ++ix)
      if (map.at(ix, iy) < tau) out.push_back({ix, iy});
  return out;
}

ImprovementReport improvement_report(const MIoUMap& before, const MIoUMap& after) {
  if (before.nx != after.nx || before.ny != after.ny || before.n != after.n)
    throw DataError("improvement report needs maps with the same grid and background count");
  ImprovementReport rep;
  for (int iy = 0; iy < before.ny; ++iy)
    for (int ix = 0; ix < before.nx; ++ix) {
      CellDelta d;
      d.cell = {ix, iy};
      d.before = before.at(ix, iy);
      d.after = after.at(ix, iy);
      d.delta = d.after - d.before;
      rep.deltas.push_back(d);
      rep.mean_before += d.before;
      rep.mean_after += d.after;
      if (d.delta > 0.0) ++rep.improved;
      else if (d.delta < 0.0) ++rep.degraded;
      else ++rep.unchanged;
    }
  if (!rep.deltas.empty()) {
    rep.mean_before /= static_cast<double>(rep.deltas.size());
    rep.mean_after /= static_cast<double>(rep.deltas.size());
  }
  std::stable_sort(rep.deltas.begin(), rep.deltas.end(),
                   [](const CellDelta& a, const CellDelta& b) { return a.delta < b.delta; });
  return rep;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("spearman: sequences differ in length");
  if (a.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t k = 0; k < ra.size(); ++k) {
    sab += (ra[k] - ma) * (rb[k] - mb);
    saa += (ra[k] - ma) * (ra[k] - ma);
    sbb += (rb[k] - mb) * (rb[k] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

std::vector<double> row_means(const MIoUMap& map) {
  std::vector<double> out;
  for (int iy = 0; iy < map.ny; ++iy) {
    double s = 0.0;
    for (int ix = 0; ix < map.nx; ++ix) s += map.at(ix, iy);
    out.push_back(s / map.nx);
  }
  return out;
}

std::string miou_csv(const MIoUMap& map) {
  const bool labels = static_cast<int>(map.xs.size()) == map.nx && static_cast<int>(map.ys.size()) == map.ny;
  std::string out = "y\\x";
  for (int ix = 0; ix < map.nx; ++ix)
    out += ',' + (labels ? format_double(map.xs[static_cast<std::size_t>(ix)]) : std::to_string(ix));
  out += '\n';
  for (int iy = 0; iy < map.ny; ++iy) {
    out += labels ? format_double(map.ys[static_cast<std::size_t>(iy)]) : std::to_string(iy);
    for (int ix = 0; ix < map.nx; ++ix) out += ',' + format_double(map.at(ix, iy));
    out += '\n';
  }
  return out;
}

std::string miou_json(const MIoUMap& map) {
  nlohmann::ordered_json j;
  j["nx"] = map.nx;
  j["ny"] = map.ny;
  j["n"] = map.n;
  j["backgrounds"] = map.backgrounds;
  j["xs"] = map.xs;
  j["ys"] = map.ys;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int iy = 0; iy < map.ny; ++iy) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (int ix = 0; ix < map.nx; ++ix) row.push_back(map.at(ix, iy));
    rows.push_back(row);
  }
  j["values"] = rows;
  return j.dump(2) + "\n";
}

MIoUMap parse_miou_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("mIoU map: ") + e.what());
  }
  MIoUMap map;
  try {
    map.nx = j.at("nx").get<int>();
    map.ny = j.at("ny").get<int>();
    map.n = j.at("n").get<int>();
    map.backgrounds = j.at("backgrounds").get<std::vector<int>>();
    map.xs = j.value("xs", std::vector<double>{});
    map.ys = j.value("ys", std::vector<double>{});
    const auto& rows = j.at("values");
    if (!rows.is_array() || static_cast<int>(rows.size()) != map.ny)
      throw DataError("mIoU map: 'values' must have ny rows");
    for (const auto& row : rows) {
      if (!row.is_array() || static_cast<int>(row.size()) != map.nx)
        throw DataError("mIoU map: every row of 'values' must have nx entries");
      for (const auto& v : row) map.values.push_back(v.get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("mIoU map: ") + e.what());
  }
  map.counts.assign(map.values.size(), map.n);
  return map;
}

std::string improvement_csv(const ImprovementReport& report) {
  std::string out = "i,j,before,after,delta\n";
  for (const CellDelta& d : report.deltas)
    out += std::to_string(d.cell.ix) + ',' + std::to_string(d.cell.iy) + ',' + format_double(d.before) +
           ',' + format_double(d.after) + ',' + format_double(d.delta) + '\n';
  return out;
}

std::string cells_csv(std::span<const GridCell> cells) {
  std::string out = "i,j\n";
  for (const GridCell& c : cells) out += std::to_string(c.ix) + ',' + std::to_string(c.iy) + '\n';
  return out;
}

std::vector<GridCell> parse_cells_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<GridCell> out;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (lineno == 1 && line == "i,j")) continue;
    GridCell c;
    char comma = 0;
    std::istringstream ls(line);
    if (!(ls >> c.ix >> comma >> c.iy) || comma != ',' || !(ls >> std::ws).eof())
      throw DataError("cells file line " + std::to_string(lineno) + ": expected 'i,j'");
    out.push_back(c);
  }
  return out;
}

}  // namespace synthlidar
