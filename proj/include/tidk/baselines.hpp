#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tidk/data_model.hpp"
#include "tidk/distributional_kernel.hpp"
#include "tidk/error.hpp"
#include "tidk/io.hpp"
#include "tidk/parallel.hpp"

namespace tidk {

/// Symmetric n x n distance matrix with zero diagonal, labelled by trajectory id.
struct DistanceMatrix {
  std::vector<std::string> ids;
  std::vector<double> values;  // row-major

  std::size_t size() const noexcept { return ids.size(); }
  double operator()(std::size_t i, std::size_t j) const { return values[i * ids.size() + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * ids.size() + j]; }
};

namespace detail {
inline void check_pair(const Trajectory& a, const Trajectory& b) {
  if (a.size() == 0 || b.size() == 0) throw InvalidArgument("distance of an empty trajectory");
  if (a.dims() != b.dims()) throw DimensionMismatch(a.dims(), b.dims(), "trajectory pair");
}

inline double directed_hausdorff(const PointSet& from, const PointSet& to) {
  double worst = 0.0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < to.size() && best > worst; ++j)
      best = std::min(best, squared_distance(from[i], to[j]));
    worst = std::max(worst, best);
  }
  return worst;
}
}  // namespace detail

/// Symmetric Hausdorff distance between the two point sets. O(|a| |b|).
inline double hausdorff(const Trajectory& a, const Trajectory& b) {
  detail::check_pair(a, b);
  // The inner loop may stop early once it cannot raise the running maximum;
  // the result is unchanged.
  return std::sqrt(std::max(detail::directed_hausdorff(a.points, b.points),
                            detail::directed_hausdorff(b.points, a.points)));
}

/// Dynamic time warping with steps {match, insert, delete} and Euclidean point
/// cost summed along the optimal path. `band` is a Sakoe-Chiba half-width.
inline double dtw(const Trajectory& a, const Trajectory& b, std::optional<std::size_t> band = std::nullopt) {
  detail::check_pair(a, b);
  const std::size_t n = a.size(), m = b.size();
  const std::size_t gap = n > m ? n - m : m - n;
  if (band && *band < gap)
    throw InvalidArgument("DTW band " + std::to_string(*band) + " cannot align lengths " + std::to_string(n) +
                          " and " + std::to_string(m));
  const std::size_t w = band.value_or(std::max(n, m));
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(m + 1, inf), curr(m + 1, inf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    std::fill(curr.begin(), curr.end(), inf);
    const std::size_t lo = i > w ? i - w : 1;
    const std::size_t hi = std::min(m, i + w);
    for (std::size_t j = lo; j <= hi; ++j) {
      const double cost = euclidean_distance(a.points[i - 1], b.points[j - 1]);
      curr[j] = cost + std::min({prev[j], curr[j - 1], prev[j - 1]});
    }
    std::swap(prev, curr);
  }
  return prev[m];
}

enum class Measure { hausdorff, dtw, idk_distance, gdk_distance };

inline std::string to_string(Measure m) {
  switch (m) {
    case Measure::hausdorff: return "hausdorff";
    case Measure::dtw: return "dtw";
    case Measure::idk_distance: return "idk";
    case Measure::gdk_distance: return "gdk";
  }
  return "?";
}

inline std::optional<Measure> parse_measure(const std::string& name) {
  if (name == "hausdorff") return Measure::hausdorff;
  if (name == "dtw") return Measure::dtw;
  if (name == "idk") return Measure::idk_distance;
  if (name == "gdk") return Measure::gdk_distance;
  return std::nullopt;
}

struct MeasureParams {
  std::optional<std::size_t> dtw_band;
  IKParams ik{16, 100, 0};
  GDKParams gdk{};
  std::size_t threads = 1;
};

/// Kernel-induced distances between precomputed mean maps.
inline DistanceMatrix distance_matrix_from_embeddings(const std::vector<std::string>& ids,
                                                      const std::vector<MeanMapVector>& embeddings,
                                                      std::size_t threads = 1) {
  DistanceMatrix dm{ids, std::vector<double>(ids.size() * ids.size(), 0.0)};
  const std::size_t n = ids.size();
  std::vector<double> self(n);
  for (std::size_t i = 0; i < n; ++i) self[i] = idk_similarity(embeddings[i], embeddings[i]);
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d2 = self[i] + self[j] - 2.0 * idk_similarity(embeddings[i], embeddings[j]);
      dm.values[i * n + j] = std::sqrt(std::max(0.0, d2));
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) dm.values[j * n + i] = dm.values[i * n + j];
  return dm;
}

/// Evaluates `distance(a, b)` once per unordered pair and mirrors it.
template <typename PairDistance>
DistanceMatrix pairwise_matrix(const TrajectoryDataset& ds, PairDistance&& distance, std::size_t threads = 1) {
  if (ds.empty()) throw InvalidArgument("pairwise matrix of an empty dataset");
  const std::size_t n = ds.size();
  DistanceMatrix dm;
  dm.ids.reserve(n);
  for (const auto& t : ds.trajectories()) dm.ids.push_back(t.id);
  dm.values.assign(n * n, 0.0);
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      try {
        dm.values[i * n + j] = distance(ds[i], ds[j]);
      } catch (const std::exception& e) {
        throw Error("pair ('" + ds[i].id + "', '" + ds[j].id + "'): " + e.what());
      }
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) dm.values[j * n + i] = dm.values[i * n + j];
  return dm;
}

inline DistanceMatrix pairwise_matrix(const TrajectoryDataset& ds, Measure measure, const MeasureParams& params = {}) {
  switch (measure) {
    case Measure::hausdorff:
      return pairwise_matrix(ds, [](const Trajectory& a, const Trajectory& b) { return hausdorff(a, b); },
                             params.threads);
    case Measure::dtw:
      return pairwise_matrix(
          ds, [&](const Trajectory& a, const Trajectory& b) { return dtw(a, b, params.dtw_band); }, params.threads);
    case Measure::idk_distance:
    case Measure::gdk_distance: {
      if (ds.empty()) throw InvalidArgument("pairwise matrix of an empty dataset");
      const auto kind = measure == Measure::idk_distance ? KernelKind::idk : KernelKind::gdk_nystrom;
      std::vector<std::string> ids;
      for (const auto& t : ds.trajectories()) ids.push_back(t.id);
      return distance_matrix_from_embeddings(ids, embed_dataset(ds, kind, params.ik, params.gdk, params.threads),
                                             params.threads);
    }
  }
  throw InvalidArgument("unknown measure");
}

/// CSV with a header row and a leading column of ids.
inline void write_distance_csv(std::ostream& out, const DistanceMatrix& dm) {
  out << "id";
  for (const auto& id : dm.ids) out << ',' << id;
  out << '\n';
  for (std::size_t i = 0; i < dm.size(); ++i) {
    out << dm.ids[i];
    for (std::size_t j = 0; j < dm.size(); ++j) out << ',' << format_double(dm(i, j));
    out << '\n';
  }
}

/// Context baseline: farthest-first seeds (starting at index 0) in the
/// distance matrix, then every item joins its nearest seed. Labels are 1..k.
inline std::vector<int> nearest_seed_clustering(const DistanceMatrix& dm, std::size_t k) {
  const std::size_t n = dm.size();
  if (k == 0 || k > n) throw InvalidArgument("nearest-seed clustering needs 1 <= k <= n");
  std::vector<std::size_t> seeds{0};
  std::vector<double> closest(n);
  for (std::size_t i = 0; i < n; ++i) closest[i] = dm(i, 0);
  while (seeds.size() < k) {
    std::size_t far = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (closest[i] > closest[far]) far = i;
    seeds.push_back(far);
    for (std::size_t i = 0; i < n; ++i) closest[i] = std::min(closest[i], dm(i, far));
  }
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t s = 1; s < k; ++s)
      if (dm(i, seeds[s]) < dm(i, seeds[best])) best = s;
    labels[i] = static_cast<int>(best + 1);
  }
  return labels;
}

}  // namespace tidk
