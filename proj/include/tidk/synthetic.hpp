#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tidk/data_model.hpp"
#include "tidk/error.hpp"
#include "tidk/io.hpp"
#include "tidk/random.hpp"

namespace tidk {

/// Labeled trajectory generator configuration. Each backbone is a polyline
/// cluster template; trajectories resample it at a random length and add
/// isotropic Gaussian jitter.
struct SyntheticSpec {
  std::vector<PointSet> backbones;
  std::size_t trajectories_per_cluster = 50;
  double sigma = 0.01;
  std::size_t min_length = 20;
  std::size_t max_length = 40;
  /// Emit every backbone in both traversal orders under distinct labels
  /// (label 2b forward, 2b+1 reversed); trajectories_per_cluster applies per label.
  bool direction_pairs = false;

  void validate() const {
    if (backbones.empty()) throw InvalidArgument("synthetic spec needs at least one backbone");
    if (!(sigma >= 0.0)) throw InvalidArgument("synthetic sigma must be >= 0");
    if (trajectories_per_cluster == 0) throw InvalidArgument("trajectories_per_cluster must be >= 1");
    if (min_length == 0 || min_length > max_length)
      throw InvalidArgument("length range must satisfy 1 <= min_length <= max_length");
    const std::size_t d = backbones.front().dims();
    for (const auto& b : backbones) {
      if (b.size() < 1) throw InvalidArgument("backbone needs at least one vertex");
      if (b.dims() != d) throw DimensionMismatch(d, b.dims(), "backbone");
    }
  }

  std::size_t cluster_count() const { return backbones.size() * (direction_pairs ? 2 : 1); }
};

/// `k` straight 2-D segments radiating from distinct, well-separated anchors
/// on a circle of radius 10; each segment has length 4.
inline SyntheticSpec separated_lines_spec(std::size_t k, std::size_t per_cluster, double sigma) {
  SyntheticSpec spec;
  spec.trajectories_per_cluster = per_cluster;
  spec.sigma = sigma;
  for (std::size_t c = 0; c < k; ++c) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(k);
    const double ax = 10.0 * std::cos(angle), ay = 10.0 * std::sin(angle);
    const double dx = -std::sin(angle), dy = std::cos(angle);
    spec.backbones.emplace_back(2, std::vector<double>{ax - 2.0 * dx, ay - 2.0 * dy, ax + 2.0 * dx, ay + 2.0 * dy});
  }
  return spec;
}

namespace detail {

/// Point at arc-length fraction u in [0, 1] along a polyline.
inline std::vector<double> polyline_at(const PointSet& line, double u) {
  const std::size_t d = line.dims();
  std::vector<double> out(line[0].begin(), line[0].end());
  if (line.size() == 1) return out;
  std::vector<double> seg(line.size() - 1);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) total += seg[i] = euclidean_distance(line[i], line[i + 1]);
  if (total <= 0.0) return out;
  double target = u * total;
  for (std::size_t i = 0; i < seg.size(); ++i) {
    if (target <= seg[i] || i + 1 == seg.size()) {
      const double f = seg[i] > 0.0 ? std::min(1.0, target / seg[i]) : 0.0;
      for (std::size_t a = 0; a < d; ++a) out[a] = line[i][a] + f * (line[i + 1][a] - line[i][a]);
      return out;
    }
    target -= seg[i];
  }
  return out;
}

inline std::vector<std::vector<double>> resample(const PointSet& line, std::size_t length) {
  std::vector<std::vector<double>> pts;
  pts.reserve(length);
  for (std::size_t i = 0; i < length; ++i) {
    const double u = length == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(length - 1);
    pts.push_back(polyline_at(line, u));
  }
  return pts;
}

}  // namespace detail

inline TrajectoryDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t rng_seed) {
  spec.validate();
  Rng rng(rng_seed);
  const std::size_t d = spec.backbones.front().dims();
  std::vector<Trajectory> out;

  auto jittered = [&](const std::vector<std::vector<double>>& clean, const std::string& id, int label) {
    PointSet pts(d);
    pts.reserve(clean.size());
    std::vector<double> p(d);
    for (const auto& c : clean) {
      for (std::size_t a = 0; a < d; ++a) p[a] = c[a] + (spec.sigma > 0.0 ? spec.sigma * rng.normal() : 0.0);
      pts.push_back(p);
    }
    return Trajectory{id, label, std::move(pts)};
  };

  const std::size_t span = spec.max_length - spec.min_length + 1;
  for (std::size_t b = 0; b < spec.backbones.size(); ++b) {
    std::vector<Trajectory> reversed;
    for (std::size_t i = 0; i < spec.trajectories_per_cluster; ++i) {
      const std::size_t length = spec.min_length + static_cast<std::size_t>(rng.below(span));
      auto clean = detail::resample(spec.backbones[b], length);
      const int label = static_cast<int>(spec.direction_pairs ? 2 * b : b);
      out.push_back(jittered(clean, "c" + std::to_string(label) + "_" + std::to_string(i), label));
      if (spec.direction_pairs) {
        std::reverse(clean.begin(), clean.end());
        reversed.push_back(
            jittered(clean, "c" + std::to_string(label + 1) + "_" + std::to_string(i), label + 1));
      }
    }
    for (auto& t : reversed) out.push_back(std::move(t));
  }
  return TrajectoryDataset(std::move(out));
}

/// Reads the key-value synthetic spec format:
///
///   # comment
///   trajectories_per_cluster = 50
///   sigma = 0.05
///   min_length = 20
///   max_length = 40
///   direction_pairs = false
///   backbone = 0 0; 4 0; 4 3        (one line per cluster, ';' between vertices)
///   separated_lines = 4             (alternative to backbone lines)
inline SyntheticSpec parse_synthetic_spec(std::istream& in, const std::string& source = "<spec>") {
  SyntheticSpec spec;
  std::size_t separated = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, line_no, "expected key = value");
    const auto key = detail::trim(text.substr(0, eq));
    const auto value = detail::trim(text.substr(eq + 1));
    auto as_size = [&] {
      std::size_t v = 0;
      if (!detail::parse_number(value, v)) throw ParseError(source, line_no, "expected a non-negative integer");
      return v;
    };
    if (key == "trajectories_per_cluster") {
      spec.trajectories_per_cluster = as_size();
    } else if (key == "min_length") {
      spec.min_length = as_size();
    } else if (key == "max_length") {
      spec.max_length = as_size();
    } else if (key == "separated_lines") {
      separated = as_size();
    } else if (key == "sigma") {
      if (!detail::parse_number(value, spec.sigma)) throw ParseError(source, line_no, "expected a real number");
    } else if (key == "direction_pairs") {
      if (value == "true" || value == "1")
        spec.direction_pairs = true;
      else if (value == "false" || value == "0")
        spec.direction_pairs = false;
      else
        throw ParseError(source, line_no, "expected true or false");
    } else if (key == "backbone") {
      std::vector<double> coords;
      std::size_t dims = 0;
      for (auto vertex : detail::split(value, ';')) {
        std::istringstream vs{std::string(vertex)};
        std::vector<double> v;
        std::string tok;
        while (vs >> tok) {
          double x = 0;
          if (!detail::parse_number(std::string_view(tok), x))
            throw ParseError(source, line_no, "invalid backbone coordinate '" + tok + "'");
          v.push_back(x);
        }
        if (v.empty()) throw ParseError(source, line_no, "empty backbone vertex");
        if (dims == 0) dims = v.size();
        if (v.size() != dims) throw ParseError(source, line_no, "backbone vertices differ in dimension");
        coords.insert(coords.end(), v.begin(), v.end());
      }
      spec.backbones.emplace_back(dims, std::move(coords));
    } else {
      throw ParseError(source, line_no, "unknown key '" + std::string(key) + "'");
    }
  }
  if (separated > 0) {
    if (!spec.backbones.empty())
      throw ParseError(source, line_no, "separated_lines and backbone are mutually exclusive");
    spec.backbones = separated_lines_spec(separated, 1, 0.0).backbones;
  }
  spec.validate();
  return spec;
}

inline SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return parse_synthetic_spec(in, path.string());
}

}  // namespace tidk
