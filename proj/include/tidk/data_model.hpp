#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tidk/error.hpp"
#include "tidk/random.hpp"

namespace tidk {

/// Row-major n x d block of real coordinates. Used for trajectory points,
/// pooled point sets and embedded trajectories alike.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::size_t dims) : dims_(dims) {}
  PointSet(std::size_t dims, std::vector<double> data) : dims_(dims), data_(std::move(data)) {
    if (dims_ == 0) throw InvalidArgument("point dimension must be at least 1");
    if (data_.size() % dims_ != 0)
      throw InvalidArgument("coordinate count is not a multiple of the dimension");
  }

  std::size_t size() const noexcept { return dims_ == 0 ? 0 : data_.size() / dims_; }
  std::size_t dims() const noexcept { return dims_; }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const double> operator[](std::size_t i) const {
    return {data_.data() + i * dims_, dims_};
  }
  std::span<double> row(std::size_t i) { return {data_.data() + i * dims_, dims_}; }

  void push_back(std::span<const double> point) {
    if (point.size() != dims_) throw DimensionMismatch(dims_, point.size(), "point");
    data_.insert(data_.end(), point.begin(), point.end());
  }
  void reserve(std::size_t points) { data_.reserve(points * dims_); }

  const std::vector<double>& data() const noexcept { return data_; }

  friend bool operator==(const PointSet&, const PointSet&) = default;

 private:
  std::size_t dims_ = 0;
  std::vector<double> data_;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    acc += diff * diff;
  }
  return acc;
}

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

/// An ordered sequence of d-dimensional location points.
struct Trajectory {
  std::string id;
  std::optional<int> label;
  PointSet points;

  std::size_t size() const noexcept { return points.size(); }
  std::size_t dims() const noexcept { return points.dims(); }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Immutable collection of trajectories sharing one dimensionality with unique ids.
class TrajectoryDataset {
 public:
  TrajectoryDataset() = default;

  explicit TrajectoryDataset(std::vector<Trajectory> trajectories)
      : trajectories_(std::move(trajectories)) {
    std::unordered_set<std::string> ids;
    for (const auto& t : trajectories_) {
      if (t.size() == 0) throw InvalidArgument("trajectory '" + t.id + "' has no points");
      if (dims_ == 0) dims_ = t.dims();
      if (t.dims() != dims_) throw DimensionMismatch(dims_, t.dims(), "trajectory '" + t.id + "'");
      for (double v : t.points.data())
        if (!std::isfinite(v))
          throw InvalidArgument("trajectory '" + t.id + "' has a non-finite coordinate");
      if (!ids.insert(t.id).second) throw InvalidArgument("duplicate trajectory id '" + t.id + "'");
      pooled_ += t.size();
    }
  }

  const std::vector<Trajectory>& trajectories() const noexcept { return trajectories_; }
  const Trajectory& operator[](std::size_t i) const { return trajectories_[i]; }
  std::size_t size() const noexcept { return trajectories_.size(); }
  bool empty() const noexcept { return trajectories_.empty(); }
  std::size_t dims() const noexcept { return dims_; }
  std::size_t pooled_point_count() const noexcept { return pooled_; }

  bool has_labels() const {
    return !trajectories_.empty() &&
           std::all_of(trajectories_.begin(), trajectories_.end(),
                       [](const Trajectory& t) { return t.label.has_value(); });
  }

  /// Label per trajectory; throws MissingLabels if any trajectory is unlabeled.
  std::vector<int> labels() const {
    std::vector<int> out;
    out.reserve(size());
    for (const auto& t : trajectories_) {
      if (!t.label) throw MissingLabels("trajectory '" + t.id + "' has no label");
      out.push_back(*t.label);
    }
    return out;
  }

  /// S: the union of all trajectory points, in dataset order.
  PointSet pooled_points() const {
    PointSet pooled(dims_);
    pooled.reserve(pooled_);
    for (const auto& t : trajectories_)
      for (std::size_t i = 0; i < t.size(); ++i) pooled.push_back(t.points[i]);
    return pooled;
  }

  friend bool operator==(const TrajectoryDataset&, const TrajectoryDataset&) = default;

 private:
  std::vector<Trajectory> trajectories_;
  std::size_t dims_ = 0;
  std::size_t pooled_ = 0;
};

/// Rescales every axis so the pooled points span [0, 1]; constant axes map to 0.5.
inline TrajectoryDataset min_max_normalize(const TrajectoryDataset& ds) {
  if (ds.empty()) throw InvalidArgument("cannot normalize an empty dataset");
  const std::size_t d = ds.dims();
  std::vector<double> lo(d, std::numeric_limits<double>::infinity());
  std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
  for (const auto& t : ds.trajectories())
    for (std::size_t i = 0; i < t.size(); ++i)
      for (std::size_t a = 0; a < d; ++a) {
        lo[a] = std::min(lo[a], t.points[i][a]);
        hi[a] = std::max(hi[a], t.points[i][a]);
      }

  std::vector<Trajectory> out;
  out.reserve(ds.size());
  for (const auto& t : ds.trajectories()) {
    std::vector<double> coords = t.points.data();
    for (std::size_t i = 0; i < coords.size(); ++i) {
      const std::size_t a = i % d;
      const double span = hi[a] - lo[a];
      coords[i] = span > 0.0 ? (coords[i] - lo[a]) / span : 0.5;
    }
    out.push_back({t.id, t.label, PointSet(d, std::move(coords))});
  }
  return TrajectoryDataset(std::move(out));
}

enum class DownsampleSelection { all, half_per_cluster };

/// Indices kept when a length-n sequence is reduced to m points by uniform
/// striding. Endpoints are kept whenever m >= 2.
inline std::vector<std::size_t> stride_indices(std::size_t n, std::size_t m) {
  std::vector<std::size_t> idx;
  if (m >= n) {
    idx.resize(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
  }
  if (m <= 1) return {0};
  idx.reserve(m);
  // round(i * (n-1) / (m-1)) in integer arithmetic, half rounds up
  for (std::size_t i = 0; i < m; ++i) idx.push_back((2 * i * (n - 1) + (m - 1)) / (2 * (m - 1)));
  return idx;
}

inline Trajectory downsample_trajectory(const Trajectory& t, double rate) {
  const std::size_t n = t.size();
  const auto m = static_cast<std::size_t>(std::ceil(rate * static_cast<double>(n) - 1e-12));
  PointSet kept(t.dims());
  for (std::size_t i : stride_indices(n, std::max<std::size_t>(m, 1))) kept.push_back(t.points[i]);
  return {t.id, t.label, std::move(kept)};
}

/// Reduces sampling rate: each selected trajectory keeps ceil(rate * n) points.
/// `half_per_cluster` shortens floor(count / 2) randomly chosen trajectories per label.
inline TrajectoryDataset downsample(const TrajectoryDataset& ds, double rate,
                                    DownsampleSelection selection, std::uint64_t rng_seed) {
  if (!(rate > 0.0 && rate <= 1.0)) throw InvalidArgument("downsample rate must be in (0, 1]");
  std::vector<bool> selected(ds.size(), selection == DownsampleSelection::all);
  if (selection == DownsampleSelection::half_per_cluster) {
    if (!ds.has_labels())
      throw MissingLabels("half_per_cluster downsampling requires labeled trajectories");
    std::map<int, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < ds.size(); ++i) by_label[*ds[i].label].push_back(i);
    Rng rng(rng_seed);
    for (const auto& [label, members] : by_label) {
      for (std::size_t pick : rng.sample_without_replacement(members.size(), members.size() / 2))
        selected[members[pick]] = true;
    }
  }
  std::vector<Trajectory> out;
  out.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i)
    out.push_back(selected[i] ? downsample_trajectory(ds[i], rate) : ds[i]);
  return TrajectoryDataset(std::move(out));
}

/// Appends an order coordinate weight * (i - 1) / max(n - 1, 1) to every point.
inline TrajectoryDataset augment_order_dimension(const TrajectoryDataset& ds, double weight = 1.0) {
  if (!(weight > 0.0)) throw InvalidArgument("order dimension weight must be positive");
  const std::size_t d = ds.dims();
  std::vector<Trajectory> out;
  out.reserve(ds.size());
  for (const auto& t : ds.trajectories()) {
    const std::size_t n = t.size();
    const double denom = static_cast<double>(std::max<std::size_t>(n - 1, 1));
    PointSet augmented(d + 1);
    augmented.reserve(n);
    std::vector<double> buffer(d + 1);
    for (std::size_t i = 0; i < n; ++i) {
      std::copy(t.points[i].begin(), t.points[i].end(), buffer.begin());
      buffer[d] = weight * static_cast<double>(i) / denom;
      augmented.push_back(buffer);
    }
    out.push_back({t.id, t.label, std::move(augmented)});
  }
  return TrajectoryDataset(std::move(out));
}

}  // namespace tidk
