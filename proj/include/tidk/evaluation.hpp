#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "tidk/baselines.hpp"
#include "tidk/data_model.hpp"
#include "tidk/distributional_kernel.hpp"
#include "tidk/error.hpp"
#include "tidk/parallel.hpp"
#include "tidk/tidkc.hpp"

namespace tidk {

/// r x c counts between true (rows) and predicted (columns) labels.
struct ContingencyTable {
  std::vector<std::vector<std::size_t>> counts;
  std::vector<std::size_t> row_sums;
  std::vector<std::size_t> col_sums;
  std::size_t total = 0;

  static ContingencyTable build(const std::vector<int>& truth, const std::vector<int>& pred) {
    if (truth.size() != pred.size()) throw InvalidArgument("label vectors differ in length");
    if (truth.empty()) throw InvalidArgument("label vectors are empty");
    std::map<int, std::size_t> rows, cols;
    for (int v : truth) rows.emplace(v, rows.size());
    for (int v : pred) cols.emplace(v, cols.size());
    ContingencyTable t;
    t.counts.assign(rows.size(), std::vector<std::size_t>(cols.size(), 0));
    t.row_sums.assign(rows.size(), 0);
    t.col_sums.assign(cols.size(), 0);
    t.total = truth.size();
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const auto r = rows[truth[i]], c = cols[pred[i]];
      ++t.counts[r][c];
      ++t.row_sums[r];
      ++t.col_sums[c];
    }
    return t;
  }
};

namespace detail {
inline double entropy(const std::vector<std::size_t>& sums, std::size_t n) {
  double h = 0.0;
  for (auto s : sums)
    if (s > 0) {
      const double p = static_cast<double>(s) / static_cast<double>(n);
      h -= p * std::log(p);
    }
  return h;
}

inline double choose2(std::size_t v) { return static_cast<double>(v) * (static_cast<double>(v) - 1.0) / 2.0; }
}  // namespace detail

/// Normalized mutual information, I(U;V) / sqrt(H(U) H(V)), natural logs.
/// Returns 1 when both labelings have zero entropy and 0 when only one does.
inline double nmi(const std::vector<int>& truth, const std::vector<int>& pred) {
  const auto t = ContingencyTable::build(truth, pred);
  const double n = static_cast<double>(t.total);
  const double hu = detail::entropy(t.row_sums, t.total);
  const double hv = detail::entropy(t.col_sums, t.total);
  if (hu == 0.0 && hv == 0.0) return 1.0;
  if (hu == 0.0 || hv == 0.0) return 0.0;
  double mi = 0.0;
  for (std::size_t r = 0; r < t.counts.size(); ++r)
    for (std::size_t c = 0; c < t.counts[r].size(); ++c) {
      const auto nij = t.counts[r][c];
      if (nij == 0) continue;
      const double pij = static_cast<double>(nij) / n;
      mi += pij * std::log(n * static_cast<double>(nij) /
                           (static_cast<double>(t.row_sums[r]) * static_cast<double>(t.col_sums[c])));
    }
  return std::clamp(mi / std::sqrt(hu * hv), 0.0, 1.0);
}

/// Adjusted Rand index from pair counts of the contingency table.
inline double ari(const std::vector<int>& truth, const std::vector<int>& pred) {
  if (truth.size() != pred.size()) throw InvalidArgument("label vectors differ in length");
  if (truth.size() < 2) throw InvalidArgument("ARI needs at least two items");
  const auto t = ContingencyTable::build(truth, pred);
  double index = 0.0, rows = 0.0, cols = 0.0;
  for (const auto& row : t.counts)
    for (auto v : row) index += detail::choose2(v);
  for (auto v : t.row_sums) rows += detail::choose2(v);
  for (auto v : t.col_sums) cols += detail::choose2(v);
  const double expected = rows * cols / detail::choose2(t.total);
  const double max_index = 0.5 * (rows + cols);
  // Equal only when both partitions are all-singletons or a single block.
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

struct PrecisionCurve {
  std::vector<std::size_t> ks;
  std::vector<double> precision;
};

/// Pairwise scores for retrieval; `higher_is_closer` is true for similarities.
struct ScoreMatrix {
  std::size_t n = 0;
  std::vector<double> values;  // row-major
  bool higher_is_closer = true;

  double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }

  static ScoreMatrix similarities(const std::vector<MeanMapVector>& embeddings, std::size_t threads = 1) {
    ScoreMatrix m{embeddings.size(), std::vector<double>(embeddings.size() * embeddings.size()), true};
    parallel_for(m.n, threads, [&](std::size_t i) {
      for (std::size_t j = 0; j < m.n; ++j) m.values[i * m.n + j] = idk_similarity(embeddings[i], embeddings[j]);
    });
    return m;
  }

  static ScoreMatrix distances(const DistanceMatrix& dm) { return {dm.size(), dm.values, false}; }
};

/// Every item is a query; its neighbours are ranked by score (self excluded,
/// lower index first on ties) and precision@k is the fraction of the top k that
/// share its label, averaged over queries.
inline PrecisionCurve precision_at_k(const ScoreMatrix& scores, const std::vector<int>& labels,
                                     std::vector<std::size_t> ks, std::size_t threads = 1) {
  const std::size_t n = scores.n;
  if (labels.size() != n) throw InvalidArgument("label count does not match the score matrix");
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ks.empty()) throw InvalidArgument("no k values requested");
  if (ks.front() == 0) throw InvalidArgument("k must be >= 1");
  if (ks.back() >= n) throw InvalidArgument("k = " + std::to_string(ks.back()) + " must be smaller than n = " + std::to_string(n));

  const std::size_t kmax = ks.back();
  std::vector<std::vector<std::size_t>> hits(n, std::vector<std::size_t>(ks.size(), 0));
  parallel_for(n, threads, [&](std::size_t q) {
    std::vector<std::size_t> order;
    order.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j)
      if (j != q) order.push_back(j);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(kmax), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double sa = scores(q, a), sb = scores(q, b);
                        if (sa != sb) return scores.higher_is_closer ? sa > sb : sa < sb;
                        return a < b;
                      });
    std::size_t same = 0, next = 0;
    for (std::size_t r = 0; r < kmax; ++r) {
      same += labels[order[r]] == labels[q];
      while (next < ks.size() && ks[next] == r + 1) hits[q][next++] = same;
    }
  });

  PrecisionCurve curve{ks, std::vector<double>(ks.size(), 0.0)};
  for (std::size_t c = 0; c < ks.size(); ++c) {
    double acc = 0.0;
    for (std::size_t q = 0; q < n; ++q) acc += static_cast<double>(hits[q][c]) / static_cast<double>(ks[c]);
    curve.precision[c] = acc / static_cast<double>(n);
  }
  return curve;
}

struct SweepRow {
  double rate = 1.0;
  DownsampleSelection selection = DownsampleSelection::all;
  double nmi = 0.0;
  double ari = 0.0;
};

/// Clustering quality as the sampling rate drops: for each rate, downsample,
/// apply `prepare` (normalization etc.), cluster and score against the labels.
template <typename Prepare>
std::vector<SweepRow> run_sampling_sweep(const TrajectoryDataset& ds, const std::vector<double>& rates,
                                         DownsampleSelection selection, const TidkcParams& params,
                                         Prepare&& prepare, std::uint64_t rng_seed = 0) {
  if (!ds.has_labels()) throw MissingLabels("sampling sweep requires labeled trajectories");
  const auto truth = ds.labels();
  std::vector<SweepRow> rows;
  for (double rate : rates) {
    const auto reduced = prepare(downsample(ds, rate, selection, rng_seed));
    const auto result = cluster(reduced, params);
    rows.push_back({rate, selection, nmi(truth, result.labels), ari(truth, result.labels)});
  }
  return rows;
}

inline std::vector<SweepRow> run_sampling_sweep(const TrajectoryDataset& ds, const std::vector<double>& rates,
                                                DownsampleSelection selection, const TidkcParams& params,
                                                std::uint64_t rng_seed = 0) {
  return run_sampling_sweep(ds, rates, selection, params, [](TrajectoryDataset d) { return d; }, rng_seed);
}

}  // namespace tidk
