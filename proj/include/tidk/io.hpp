#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "tidk/data_model.hpp"
#include "tidk/error.hpp"

namespace tidk {

using json = nlohmann::json;

enum class DatasetFormat { jsonl, csv_long };

/// Shortest decimal that parses back to exactly `v`.
inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open input file '" + path.string() + "'");
  return in;
}

inline Trajectory trajectory_from_json(const json& obj, const std::string& source, std::size_t line) {
  auto fail = [&](const std::string& what) { return ParseError(source, line, what); };
  if (!obj.is_object()) throw fail("expected a JSON object");
  if (!obj.contains("id") || !obj["id"].is_string()) throw fail("missing string field 'id'");
  if (!obj.contains("points") || !obj["points"].is_array()) throw fail("missing array field 'points'");
  Trajectory t;
  t.id = obj["id"].get<std::string>();
  if (obj.contains("label") && !obj["label"].is_null()) {
    if (!obj["label"].is_number_integer()) throw fail("'label' must be an integer");
    t.label = obj["label"].get<int>();
  }
  const auto& pts = obj["points"];
  if (pts.empty()) throw fail("trajectory '" + t.id + "' has no points");
  if (!pts[0].is_array() || pts[0].empty()) throw fail("each point must be a non-empty array");
  const std::size_t d = pts[0].size();
  std::vector<double> coords;
  coords.reserve(pts.size() * d);
  for (const auto& p : pts) {
    if (!p.is_array()) throw fail("each point must be an array");
    if (p.size() != d)
      throw fail(DimensionMismatch(d, p.size(), "point within trajectory '" + t.id + "'").what());
    for (const auto& c : p) {
      if (!c.is_number()) throw fail("coordinates must be numbers");
      coords.push_back(c.get<double>());
    }
  }
  t.points = PointSet(d, std::move(coords));
  return t;
}

inline TrajectoryDataset build_dataset(std::vector<Trajectory> trajectories, const std::string& source) {
  if (trajectories.empty()) throw Error(source + ": file contains no trajectories");
  return TrajectoryDataset(std::move(trajectories));
}

}  // namespace detail

inline TrajectoryDataset read_jsonl(std::istream& in, const std::string& source = "<jsonl>") {
  std::vector<Trajectory> trajectories;
  std::string line;
  std::size_t line_no = 0;
  std::size_t dims = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(source, line_no, e.what());
    }
    auto t = detail::trajectory_from_json(obj, source, line_no);
    if (dims == 0) dims = t.dims();
    if (t.dims() != dims)
      throw ParseError(source, line_no, DimensionMismatch(dims, t.dims(), "trajectory '" + t.id + "'").what());
    trajectories.push_back(std::move(t));
  }
  return detail::build_dataset(std::move(trajectories), source);
}

/// Header: traj_id,seq,x1,...,xd[,label]. Rows may arrive in any order; points
/// are grouped by traj_id (first-appearance order) and sorted by seq.
inline TrajectoryDataset read_csv_long(std::istream& in, const std::string& source = "<csv>") {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string_view> header;
  std::string header_line;
  while (std::getline(in, header_line)) {
    ++line_no;
    if (!detail::trim(header_line).empty()) break;
  }
  if (detail::trim(header_line).empty()) throw Error(source + ": file contains no trajectories");
  header = detail::split(header_line, ',');
  if (header.size() < 3 || header[0] != "traj_id" || header[1] != "seq")
    throw ParseError(source, line_no, "header must start with traj_id,seq followed by coordinate columns");
  const bool has_label = header.back() == "label";
  const std::size_t dims = header.size() - 2 - (has_label ? 1 : 0);
  if (dims == 0) throw ParseError(source, line_no, "header has no coordinate columns");

  struct Pending {
    std::vector<std::pair<long long, std::vector<double>>> rows;
    std::optional<int> label;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, Pending> groups;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split(line, ',');
    if (cells.size() != header.size())
      throw ParseError(source, line_no,
                       "expected " + std::to_string(header.size()) + " columns, got " +
                           std::to_string(cells.size()));
    std::string id(cells[0]);
    long long seq = 0;
    if (!detail::parse_number(cells[1], seq)) throw ParseError(source, line_no, "seq must be an integer");
    std::vector<double> coords(dims);
    for (std::size_t a = 0; a < dims; ++a)
      if (!detail::parse_number(cells[2 + a], coords[a]))
        throw ParseError(source, line_no, "invalid coordinate '" + std::string(cells[2 + a]) + "'");
    auto [it, inserted] = groups.try_emplace(id);
    if (inserted) order.push_back(id);
    if (has_label) {
      int label = 0;
      if (!detail::parse_number(cells.back(), label))
        throw ParseError(source, line_no, "label must be an integer");
      if (it->second.label && *it->second.label != label)
        throw ParseError(source, line_no, "conflicting labels for trajectory '" + id + "'");
      it->second.label = label;
    }
    it->second.rows.emplace_back(seq, std::move(coords));
  }

  std::vector<Trajectory> trajectories;
  trajectories.reserve(order.size());
  for (const auto& id : order) {
    auto& g = groups[id];
    std::stable_sort(g.rows.begin(), g.rows.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    PointSet pts(dims);
    for (const auto& [seq, coords] : g.rows) pts.push_back(coords);
    trajectories.push_back({id, g.label, std::move(pts)});
  }
  return detail::build_dataset(std::move(trajectories), source);
}

inline TrajectoryDataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  auto in = detail::open_input(path);
  return format == DatasetFormat::jsonl ? read_jsonl(in, path.string()) : read_csv_long(in, path.string());
}

/// Picks the format from the file extension: .csv is long CSV, anything else JSONL.
inline TrajectoryDataset load_dataset(const std::filesystem::path& path) {
  return load_dataset(path, path.extension() == ".csv" ? DatasetFormat::csv_long : DatasetFormat::jsonl);
}

inline void write_jsonl(std::ostream& out, const TrajectoryDataset& ds) {
  for (const auto& t : ds.trajectories()) {
    // Hand-written so coordinates use the shortest round-trip form.
    out << "{\"id\":" << json(t.id).dump();
    if (t.label) out << ",\"label\":" << *t.label;
    out << ",\"points\":[";
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i) out << ',';
      out << '[';
      for (std::size_t a = 0; a < t.dims(); ++a) {
        if (a) out << ',';
        out << format_double(t.points[i][a]);
      }
      out << ']';
    }
    out << "]}\n";
  }
}

inline void write_csv_long(std::ostream& out, const TrajectoryDataset& ds) {
  const bool labeled = ds.has_labels();
  out << "traj_id,seq";
  for (std::size_t a = 0; a < ds.dims(); ++a) out << ",x" << (a + 1);
  if (labeled) out << ",label";
  out << '\n';
  for (const auto& t : ds.trajectories())
    for (std::size_t i = 0; i < t.size(); ++i) {
      out << t.id << ',' << i;
      for (std::size_t a = 0; a < t.dims(); ++a) out << ',' << format_double(t.points[i][a]);
      if (labeled) out << ',' << *t.label;
      out << '\n';
    }
}

inline void save_dataset(const std::filesystem::path& path, const TrajectoryDataset& ds,
                         DatasetFormat format = DatasetFormat::jsonl) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open output file '" + path.string() + "'");
  if (format == DatasetFormat::jsonl)
    write_jsonl(out, ds);
  else
    write_csv_long(out, ds);
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace tidk
